#include "thinktank/llm/gateway.hpp"

#include "thinktank/error.hpp"
#include "thinktank/text.hpp"

namespace thinktank::llm {

std::string_view to_string(MessageRole r) {
  switch (r) {
    case MessageRole::system: return "system";
    case MessageRole::user: return "user";
    case MessageRole::assistant: return "assistant";
  }
  return "user";
}

std::string ChatRequest::full_text() const {
  std::string out;
  for (const auto& m : messages) {
    out += m.content;
    out += '\n';
  }
  return out;
}

void validate(const ChatRequest& request) {
  std::vector<std::string> problems;
  if (request.messages.empty()) problems.emplace_back("messages must be non-empty");
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (request.messages[i].content.empty()) problems.push_back("message " + std::to_string(i) + " is empty");
    if (i > 0 && request.messages[i].role == MessageRole::system) {
      problems.push_back("only the first message may be a system message");
    }
  }
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    problems.emplace_back("temperature must be in [0, 2]");
  }
  if (request.max_output_chars == 0) problems.emplace_back("max_output_chars must be positive");
  if (request.timeout.count() <= 0) problems.emplace_back("timeout must be positive");
  if (!problems.empty()) throw Error(ErrorKind::validation, "invalid chat request: " + problems.front(), problems);
}

void validate_embed_input(const std::vector<std::string>& texts) {
  if (texts.empty()) fail(ErrorKind::validation, "embed needs at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) fail(ErrorKind::validation, "embed text " + std::to_string(i) + " is empty");
  }
}

}  // namespace thinktank::llm
