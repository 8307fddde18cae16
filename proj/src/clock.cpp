#include "thinktank/clock.hpp"

#include <cstdio>
#include <ctime>

#include "thinktank/error.hpp"

namespace thinktank {

TimePoint SteppingClock::now() {
  std::lock_guard lock(mu_);
  const TimePoint t = next_;
  next_ += step_;
  return t;
}

TimePoint SteppingClock::default_start() {
  // 2025-01-01T00:00:00Z
  return TimePoint(std::chrono::seconds(1735689600));
}

std::string format_timestamp(TimePoint tp) {
  using namespace std::chrono;
  const auto ms_total = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms_total / 1000);
  const int ms = static_cast<int>(ms_total % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];  // roomy enough that -Wformat-truncation can prove no truncation
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

TimePoint parse_timestamp(std::string_view text) {
  std::tm tm{};
  int ms = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &ms) != 7) {
    fail(ErrorKind::validation, "malformed timestamp: " + s);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return TimePoint(std::chrono::seconds(secs)) + std::chrono::milliseconds(ms);
}

IdGenerator::IdGenerator(Clock& clock, std::uint64_t seed) : clock_(clock), rng_(seed) {}

IdGenerator::IdGenerator(Clock& clock) : clock_(clock), rng_(std::random_device{}()) {}

std::string IdGenerator::next(std::string_view prefix) {
  using namespace std::chrono;
  const TimePoint tp = clock_.now();
  const auto ms_total = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms_total / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);

  std::uint64_t counter = 0;
  std::uint32_t salt = 0;
  {
    std::lock_guard lock(mu_);
    counter = ++counter_;
    salt = static_cast<std::uint32_t>(rng_() & 0xFFFFu);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*s_%04d%02d%02dT%02d%02d%02d%03d_%06llu_%04x", static_cast<int>(prefix.size()),
                prefix.data(), tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms_total % 1000), static_cast<unsigned long long>(counter), salt);
  return buf;
}

}  // namespace thinktank
