#include "thinktank/meeting/synthesis_parser.hpp"

#include <cctype>

#include "thinktank/text.hpp"

namespace thinktank::meeting {
namespace {

std::string upper_letters(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) out.push_back(static_cast<char>(std::toupper(u)));
    else if (c == ' ' || c == '-') out.push_back(' ');
  }
  return std::string(text::trim(out));
}

// Strips markdown decoration around a header line: "## **Synthesis:**" -> "SYNTHESIS"
std::string header_key(std::string_view line) {
  std::string_view t = text::trim(line);
  while (!t.empty() && (t.front() == '#' || t.front() == '*' || t.front() == '_')) t.remove_prefix(1);
  const auto colon = t.find(':');
  std::string_view head = colon == std::string_view::npos ? t : t.substr(0, colon);
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : t.substr(colon + 1);
  // Only the header itself may appear on the line (decoration aside).
  for (char c : rest) {
    if (c != '*' && c != '_' && c != ' ' && c != '\t' && c != '\r') return {};
  }
  std::string key = upper_letters(head);
  if (key == "FOLLOW UP QUESTIONS" || key == "FOLLOWUP QUESTIONS") return "FOLLOWUP";
  if (key == "SYNTHESIS") return "SYNTHESIS";
  return {};
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(s.substr(pos));
      break;
    }
    lines.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// "1. text", "2) text", "- text", "* text" -> "text"; other non-empty lines continue the previous item.
std::optional<std::string_view> list_item(std::string_view line) {
  std::string_view t = text::trim(line);
  if (t.empty()) return std::nullopt;
  std::size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) return text::trim(t.substr(i + 1));
  if (t.front() == '-' || t.front() == '*') return text::trim(t.substr(1));
  return std::nullopt;
}

// "None.", "- n/a" and the like stand for an empty question list.
bool says_none(std::string_view item) {
  std::string key = upper_letters(item);
  return key == "NONE" || key == "NA" || key == "N A" || key == "NO QUESTIONS" || key == "NO FURTHER QUESTIONS";
}

}  // namespace

std::optional<ParsedSynthesis> parse_synthesis(std::string_view reply) {
  const auto lines = split_lines(reply);
  std::optional<std::size_t> synth_at;
  std::optional<std::size_t> follow_at;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string key = header_key(lines[i]);
    if (key == "SYNTHESIS" && !synth_at) synth_at = i;
    if (key == "FOLLOWUP" && synth_at && !follow_at) follow_at = i;
  }
  if (!synth_at || !follow_at) return std::nullopt;

  ParsedSynthesis out;
  std::string body;
  for (std::size_t i = *synth_at + 1; i < *follow_at; ++i) {
    body += lines[i];
    body += '\n';
  }
  out.synthesis = std::string(text::trim(body));
  if (out.synthesis.empty()) return std::nullopt;

  for (std::size_t i = *follow_at + 1; i < lines.size(); ++i) {
    if (auto item = list_item(lines[i])) {
      if (!item->empty() && !says_none(*item)) out.follow_up_questions.emplace_back(*item);
    } else if (says_none(lines[i])) {
      continue;
    } else if (const auto t = text::trim(lines[i]); !t.empty()) {
      if (out.follow_up_questions.empty()) {
        out.follow_up_questions.emplace_back(t);
      } else {
        out.follow_up_questions.back() += ' ';
        out.follow_up_questions.back() += t;
      }
    }
  }
  return out;
}

ParsedSynthesis degrade_synthesis(std::string_view reply) { return ParsedSynthesis{std::string(text::trim(reply)), {}}; }

std::string render_synthesis(const ParsedSynthesis& parsed) {
  std::string out(kSynthesisHeader);
  out += '\n';
  out += parsed.synthesis;
  out += '\n';
  out += kFollowUpHeader;
  for (std::size_t i = 0; i < parsed.follow_up_questions.size(); ++i) {
    out += '\n';
    out += std::to_string(i + 1) + ". " + parsed.follow_up_questions[i];
  }
  return out;
}

}  // namespace thinktank::meeting
