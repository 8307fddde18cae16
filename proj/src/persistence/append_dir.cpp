#include "thinktank/persistence/append_dir.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "thinktank/error.hpp"
#include "thinktank/persistence/fs_util.hpp"

namespace thinktank::persistence {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";

struct FileGuard {
  int fd = -1;
  ~FileGuard() {
    if (fd >= 0) ::close(fd);
  }
};

void append_at(const fs::path& path, std::uint64_t committed, const std::string& bytes) {
  FileGuard f;
  f.fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (f.fd < 0) fail(ErrorKind::integrity, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (::ftruncate(f.fd, static_cast<off_t>(committed)) != 0 ||
      ::lseek(f.fd, static_cast<off_t>(committed), SEEK_SET) < 0) {
    fail(ErrorKind::integrity, "cannot position " + path.string() + ": " + std::strerror(errno));
  }
  const char* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const ssize_t n = ::write(f.fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::integrity, "write failed for " + path.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(f.fd) != 0) fail(ErrorKind::integrity, "fsync failed for " + path.string());
}

void truncate_quietly(const fs::path& path, std::uint64_t length) {
  std::error_code ec;
  if (fs::exists(path, ec)) fs::resize_file(path, length, ec);
}

}  // namespace

AppendOnlyDir::AppendOnlyDir(fs::path dir) : dir_(std::move(dir)) {}

bool AppendOnlyDir::exists() const { return fs::exists(dir_ / kManifest); }

void AppendOnlyDir::initialize(const json& meta) {
  fs::create_directories(dir_);
  const json manifest = {{"format_version", 1}, {"meta", meta}, {"lengths", json::object()}};
  atomic_write_file(dir_ / kManifest, manifest.dump(2));
}

json AppendOnlyDir::load_manifest() const {
  const fs::path path = dir_ / kManifest;
  const std::string text = read_file(path);
  try {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) {
      fail(ErrorKind::integrity, "unsupported manifest version in " + path.string());
    }
    j.at("meta");
    j.at("lengths");
    return j;
  } catch (const json::exception& e) {
    fail(ErrorKind::integrity, "corrupt manifest " + path.string() + ": " + e.what());
  }
}

json AppendOnlyDir::meta() const { return load_manifest().at("meta"); }

std::uint64_t AppendOnlyDir::committed_length(const std::string& file) const {
  const json m = load_manifest();
  return m.at("lengths").value(file, std::uint64_t{0});
}

std::string AppendOnlyDir::read_committed(const std::string& file) const {
  const std::uint64_t len = committed_length(file);
  if (len == 0) return {};
  const fs::path path = dir_ / file;
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error&) {
    fail(ErrorKind::integrity, "committed file missing: " + path.string());
  }
  if (bytes.size() < len) {
    fail(ErrorKind::integrity, "file " + path.string() + " is shorter than its committed length");
  }
  bytes.resize(len);
  return bytes;
}

void AppendOnlyDir::commit(const std::map<std::string, std::string>& appends, const json& new_meta) {
  json manifest = load_manifest();
  json lengths = manifest.at("lengths");
  std::map<std::string, std::uint64_t> before;
  for (const auto& [file, _] : appends) before[file] = lengths.value(file, std::uint64_t{0});

  try {
    for (const auto& [file, bytes] : appends) {
      append_at(dir_ / file, before[file], bytes);
      lengths[file] = before[file] + bytes.size();
    }
    manifest["lengths"] = lengths;
    manifest["meta"] = new_meta;
    atomic_write_file(dir_ / kManifest, manifest.dump(2));
  } catch (...) {
    for (const auto& [file, len] : before) truncate_quietly(dir_ / file, len);
    throw;
  }
}

}  // namespace thinktank::persistence
