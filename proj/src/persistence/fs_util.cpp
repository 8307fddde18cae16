#include "thinktank/persistence/fs_util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "thinktank/error.hpp"

namespace thinktank::persistence {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
  fail(ErrorKind::integrity, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const fs::path& path) {
  const char* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write failed for", path);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

}  // namespace

void fsync_directory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void atomic_write_file(const fs::path& path, std::string_view bytes) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot create", tmp);
  try {
    write_all(fd, bytes, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_fail("fsync failed for", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) io_fail("rename failed for", path);
  fsync_directory(dir);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pack_f32_le(std::span<const float> values) {
  std::string out;
  out.resize(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    out[i * 4 + 0] = static_cast<char>(bits & 0xFF);
    out[i * 4 + 1] = static_cast<char>((bits >> 8) & 0xFF);
    out[i * 4 + 2] = static_cast<char>((bits >> 16) & 0xFF);
    out[i * 4 + 3] = static_cast<char>((bits >> 24) & 0xFF);
  }
  return out;
}

std::vector<float> unpack_f32_le(std::string_view bytes) {
  if (bytes.size() % 4 != 0) fail(ErrorKind::integrity, "vector data is not a whole number of float32 values");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto b = [&](std::size_t k) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + k])); };
    out[i] = std::bit_cast<float>(b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24));
  }
  return out;
}

}  // namespace thinktank::persistence
