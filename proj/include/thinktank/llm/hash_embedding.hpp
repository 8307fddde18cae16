#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace thinktank::llm {

/// Deterministic bag-of-words embedding used by the scripted backend.
///
/// Rule:
///   1. Tokens are maximal runs of bytes that are ASCII alphanumerics or >= 0x80;
///      ASCII letters are lowercased. A text with no token uses the whole text as one token.
///   2. Each token seeds a SplitMix64 stream with its FNV-1a 64 hash; component i
///      draws the (i+1)-th output z and maps it to (z >> 11) * 2^-53 * 2 - 1.
///   3. Token vectors are summed in double precision, L2-normalized, and stored as float.
///
/// Texts sharing vocabulary therefore get positive cosine similarity.
std::vector<float> hash_embedding(std::string_view text, std::size_t dim);

std::uint64_t fnv1a64(std::string_view bytes);
std::vector<std::string> hash_tokens(std::string_view text);

}  // namespace thinktank::llm
