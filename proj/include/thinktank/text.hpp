#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Character counts throughout the engine are code points.
namespace thinktank::text {

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in);

std::size_t char_count(std::string_view utf8);

/// Byte offset of every code point start, plus a final entry equal to size().
std::vector<std::size_t> char_offsets(std::string_view utf8);

/// The last `max_chars` code points of `utf8`.
std::string_view tail_chars(std::string_view utf8, std::size_t max_chars);

std::string_view trim(std::string_view s);

/// Keeps the most recent `budget` characters, prefixing a marker when something was cut.
std::string truncate_front(std::string_view utf8, std::size_t budget);

inline constexpr std::string_view kTruncationMarker = "[...] ";

}  // namespace thinktank::text
