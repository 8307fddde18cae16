#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "thinktank/model.hpp"

namespace thinktank::persistence {

/// Append-only meeting log. One record per line: 8 hex digits of CRC-32 over
/// the JSON payload, a space, the payload, '\n'. A final line without its
/// newline is an interrupted append and is ignored; any other damage is an
/// integrity error.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);

  /// Requires event.seq == last_seq() + 1.
  void append(const MeetingEvent& event);
  std::uint64_t last_seq();

  /// Events with seq >= from_seq, in order.
  static std::vector<MeetingEvent> read(const std::filesystem::path& path, std::uint64_t from_seq = 1);

  static std::string encode(const MeetingEvent& event);

 private:
  struct Scan {
    std::vector<MeetingEvent> events;
    std::uint64_t valid_bytes = 0;
  };
  static Scan scan(const std::filesystem::path& path, std::string_view bytes);
  void load_tail();

  std::filesystem::path path_;
  std::mutex mu_;
  bool loaded_ = false;
  std::uint64_t last_seq_ = 0;
  std::uint64_t valid_bytes_ = 0;
};

}  // namespace thinktank::persistence
