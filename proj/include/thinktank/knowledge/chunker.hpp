#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace thinktank::knowledge {

/// [start, end) in characters (code points) of the normalized text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct TextChunk {
  CharSpan span;
  std::string text;
};

/// Repairs invalid UTF-8, drops control characters, collapses whitespace runs
/// to one space and trims both ends.
std::string normalize_whitespace(std::string_view raw);

/// Chunks start at every multiple of (chunk_size - overlap) below the text
/// length and cover [start, min(start + chunk_size, length)).
/// Error(validation) when chunk_size <= overlap or the text is empty.
std::vector<TextChunk> chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap);

}  // namespace thinktank::knowledge
