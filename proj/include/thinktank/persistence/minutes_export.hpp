#pragma once

#include <string>

#include "thinktank/model.hpp"

namespace thinktank::persistence {

/// Deterministic plain-text minutes: Agenda, Participants, per-round
/// Synthesis and Follow-up Questions, Final Summary.
std::string render_minutes(const MeetingMinutes& minutes, const ProjectRecord& project);

}  // namespace thinktank::persistence
