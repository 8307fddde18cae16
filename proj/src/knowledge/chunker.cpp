#include "thinktank/knowledge/chunker.hpp"

#include "thinktank/error.hpp"
#include "thinktank/text.hpp"

namespace thinktank::knowledge {
namespace {

bool is_ascii_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

std::string normalize_whitespace(std::string_view raw) {
  const std::string clean = text::sanitize_utf8(raw);
  std::string out;
  out.reserve(clean.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto c = static_cast<unsigned char>(clean[i]);
    if (is_ascii_space(c)) {
      pending_space = true;
      continue;
    }
    if (c < 0x20 || c == 0x7F) continue;
    // C1 controls U+0080..U+009F
    if (c == 0xC2 && i + 1 < clean.size()) {
      const auto next = static_cast<unsigned char>(clean[i + 1]);
      if (next >= 0x80 && next <= 0x9F) {
        ++i;
        continue;
      }
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::vector<TextChunk> chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap) {
  if (chunk_size <= overlap) {
    fail(ErrorKind::validation, "chunk_size (" + std::to_string(chunk_size) + ") must exceed overlap (" +
                                    std::to_string(overlap) + ")");
  }
  if (text.empty()) fail(ErrorKind::validation, "cannot chunk empty text");

  const std::vector<std::size_t> offsets = text::char_offsets(text);
  const std::size_t length = offsets.size() - 1;
  const std::size_t stride = chunk_size - overlap;

  std::vector<TextChunk> chunks;
  chunks.reserve(length / stride + 1);
  for (std::size_t start = 0; start < length; start += stride) {
    const std::size_t end = std::min(start + chunk_size, length);
    chunks.push_back(TextChunk{{start, end}, std::string(text.substr(offsets[start], offsets[end] - offsets[start]))});
  }
  return chunks;
}

}  // namespace thinktank::knowledge
