#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinktank::meeting {

struct ParsedSynthesis {
  std::string synthesis;
  std::vector<std::string> follow_up_questions;

  bool operator==(const ParsedSynthesis&) const = default;
};

inline constexpr std::string_view kSynthesisHeader = "SYNTHESIS:";
inline constexpr std::string_view kFollowUpHeader = "FOLLOW-UP QUESTIONS:";

/// Reads a coordinator reply with a SYNTHESIS section and a FOLLOW-UP
/// QUESTIONS section (numbered or bulleted list, possibly empty). Headers are
/// matched case-insensitively and may carry markdown decoration. nullopt when
/// either header is missing or the synthesis is empty.
std::optional<ParsedSynthesis> parse_synthesis(std::string_view reply);

/// Whole reply as synthesis, no questions.
ParsedSynthesis degrade_synthesis(std::string_view reply);

/// Canonical text form used for events: the two headers with a numbered list.
std::string render_synthesis(const ParsedSynthesis& parsed);

}  // namespace thinktank::meeting
