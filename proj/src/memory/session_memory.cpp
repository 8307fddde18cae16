#include "thinktank/memory/session_memory.hpp"

#include "thinktank/error.hpp"
#include "thinktank/text.hpp"

namespace thinktank::memory {

SessionMemory append_turn(SessionMemory session, std::string speaker, Phase phase, std::string content) {
  if (content.empty()) fail(ErrorKind::validation, "session turn content must be non-empty");
  session.turns.push_back(SessionTurn{std::move(speaker), phase, std::move(content)});
  return session;
}

std::string render_turn(const SessionTurn& turn) {
  std::string out = "[";
  out += turn.speaker;
  out += '/';
  out += to_string(turn.phase);
  out += "] ";
  out += turn.content;
  out += '\n';
  return out;
}

std::string session_context(const SessionMemory& session, std::size_t budget) {
  if (budget == 0 || session.turns.empty()) return {};
  std::vector<std::string> picked;
  std::size_t used = 0;
  for (auto it = session.turns.rbegin(); it != session.turns.rend(); ++it) {
    std::string rendered = render_turn(*it);
    const std::size_t n = text::char_count(rendered);
    if (used + n > budget) {
      if (picked.empty()) picked.push_back(text::truncate_front(rendered, budget));
      break;
    }
    used += n;
    picked.push_back(std::move(rendered));
  }
  std::string out;
  for (auto it = picked.rbegin(); it != picked.rend(); ++it) out += *it;
  return out;
}

}  // namespace thinktank::memory
