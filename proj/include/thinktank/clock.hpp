#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace thinktank {

using TimePoint = std::chrono::system_clock::time_point;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
};

class SystemClock final : public Clock {
 public:
  TimePoint now() override { return std::chrono::system_clock::now(); }
};

/// Advances a fixed step on every call; makes timestamps reproducible.
class SteppingClock final : public Clock {
 public:
  explicit SteppingClock(TimePoint start = default_start(),
                         std::chrono::milliseconds step = std::chrono::milliseconds(1000))
      : next_(start), step_(step) {}

  TimePoint now() override;

  static TimePoint default_start();

 private:
  std::mutex mu_;
  TimePoint next_;
  std::chrono::milliseconds step_;
};

/// "2026-10-16T15:13:00.123Z"
std::string format_timestamp(TimePoint tp);
TimePoint parse_timestamp(std::string_view text);

/// Opaque, sortable, time-prefixed identifiers: <prefix>_<yyyymmddThhmmssmmm>_<counter>_<rand>.
class IdGenerator {
 public:
  IdGenerator(Clock& clock, std::uint64_t seed);
  explicit IdGenerator(Clock& clock);

  std::string next(std::string_view prefix);

 private:
  Clock& clock_;
  std::mutex mu_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace thinktank
