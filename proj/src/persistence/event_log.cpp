#include "thinktank/persistence/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>

#include "thinktank/error.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/fs_util.hpp"

namespace thinktank::persistence {
namespace fs = std::filesystem;

namespace {

std::uint32_t crc_of(std::string_view payload) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

bool parse_hex8(std::string_view s, std::uint32_t& out) {
  if (s.size() != 8) return false;
  out = 0;
  for (char c : s) {
    out <<= 4;
    if (c >= '0' && c <= '9') out |= static_cast<std::uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f') out |= static_cast<std::uint32_t>(c - 'a' + 10);
    else return false;
  }
  return true;
}

}  // namespace

EventLog::EventLog(fs::path path) : path_(std::move(path)) {}

std::string EventLog::encode(const MeetingEvent& event) {
  const std::string payload = dump_compact(nlohmann::json(event));
  char crc[9];
  std::snprintf(crc, sizeof crc, "%08x", crc_of(payload));
  std::string line(crc, 8);
  line += ' ';
  line += payload;
  line += '\n';
  return line;
}

EventLog::Scan EventLog::scan(const fs::path& path, std::string_view bytes) {
  Scan out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) break;  // interrupted append
    ++line_no;
    const std::string_view line = bytes.substr(pos, nl - pos);
    const auto where = [&] { return path.string() + " record " + std::to_string(line_no); };
    std::uint32_t expected = 0;
    if (line.size() < 10 || line[8] != ' ' || !parse_hex8(line.substr(0, 8), expected)) {
      fail(ErrorKind::integrity, "malformed event record in " + where());
    }
    const std::string_view payload = line.substr(9);
    if (crc_of(payload) != expected) fail(ErrorKind::integrity, "checksum mismatch in " + where());
    MeetingEvent ev;
    try {
      ev = nlohmann::json::parse(payload).get<MeetingEvent>();
    } catch (const std::exception& e) {
      fail(ErrorKind::integrity, "undecodable event in " + where() + ": " + e.what());
    }
    const std::uint64_t want = out.events.empty() ? 1 : out.events.back().seq + 1;
    if (ev.seq != want) {
      fail(ErrorKind::integrity, "sequence gap in " + where() + ": expected " + std::to_string(want) + ", found " +
                                     std::to_string(ev.seq));
    }
    out.events.push_back(std::move(ev));
    pos = nl + 1;
    out.valid_bytes = pos;
  }
  return out;
}

std::vector<MeetingEvent> EventLog::read(const fs::path& path, std::uint64_t from_seq) {
  if (!fs::exists(path)) return {};
  const std::string bytes = read_file(path);
  Scan s = scan(path, bytes);
  std::vector<MeetingEvent> out;
  for (auto& ev : s.events) {
    if (ev.seq >= from_seq) out.push_back(std::move(ev));
  }
  return out;
}

void EventLog::load_tail() {
  if (loaded_) return;
  if (fs::exists(path_)) {
    const std::string bytes = read_file(path_);
    const Scan s = scan(path_, bytes);
    last_seq_ = s.events.empty() ? 0 : s.events.back().seq;
    valid_bytes_ = s.valid_bytes;
  }
  loaded_ = true;
}

std::uint64_t EventLog::last_seq() {
  std::lock_guard lock(mu_);
  load_tail();
  return last_seq_;
}

void EventLog::append(const MeetingEvent& event) {
  std::lock_guard lock(mu_);
  load_tail();
  if (event.seq != last_seq_ + 1) {
    fail(ErrorKind::integrity, "event seq " + std::to_string(event.seq) + " does not follow " +
                                   std::to_string(last_seq_) + " in " + path_.string());
  }
  fs::create_directories(path_.parent_path());
  const std::string line = encode(event);
  const int fd = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorKind::integrity, "cannot open " + path_.string() + ": " + std::strerror(errno));
  // Drop any torn tail left by an interrupted append before writing.
  bool ok = ::ftruncate(fd, static_cast<off_t>(valid_bytes_)) == 0 &&
            ::lseek(fd, static_cast<off_t>(valid_bytes_), SEEK_SET) >= 0;
  const char* p = line.data();
  std::size_t left = line.size();
  while (ok && left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      ok = false;
      break;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ok = ok && ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) fail(ErrorKind::integrity, "append failed for " + path_.string());
  last_seq_ = event.seq;
  valid_bytes_ += line.size();
}

}  // namespace thinktank::persistence
