#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thinktank/model.hpp"

namespace thinktank::memory {

struct SessionTurn {
  std::string speaker;
  Phase phase = Phase::expert_turn;
  std::string content;

  bool operator==(const SessionTurn&) const = default;
};

/// Short-term context of one meeting; append-only, in transcript order.
struct SessionMemory {
  std::string meeting_id;
  std::vector<SessionTurn> turns;
};

/// Error(validation) on empty content.
SessionMemory append_turn(SessionMemory session, std::string speaker, Phase phase, std::string content);

/// "[speaker/phase] content\n"
std::string render_turn(const SessionTurn& turn);

/// The longest suffix of rendered turns fitting in `budget` characters. When
/// even the newest turn does not fit, its tail is kept behind a marker.
std::string session_context(const SessionMemory& session, std::size_t budget);

}  // namespace thinktank::memory
