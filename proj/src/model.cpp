#include "thinktank/model.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "thinktank/error.hpp"
#include "thinktank/text.hpp"

namespace thinktank {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::state: return "state";
    case ErrorKind::gateway: return "gateway";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::config: return "config";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::integrity: return "integrity";
  }
  return "unknown";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, std::string_view what) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  fail(ErrorKind::validation, "unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Role v) {
  switch (v) {
    case Role::coordinator: return "coordinator";
    case Role::domain_expert: return "domain_expert";
    case Role::critical_thinker: return "critical_thinker";
  }
  return "?";
}

std::string_view to_string(MeetingKind v) { return v == MeetingKind::team ? "team" : "warmup"; }

std::string_view to_string(MeetingStatus v) {
  switch (v) {
    case MeetingStatus::running: return "running";
    case MeetingStatus::completed: return "completed";
    case MeetingStatus::failed: return "failed";
  }
  return "?";
}

std::string_view to_string(Media v) {
  switch (v) {
    case Media::plain_text: return "plain_text";
    case Media::markdown: return "markdown";
    case Media::pdf_extracted: return "pdf_extracted";
  }
  return "?";
}

std::string_view to_string(Phase v) {
  switch (v) {
    case Phase::meeting_started: return "meeting_started";
    case Phase::guidance: return "guidance";
    case Phase::expert_turn: return "expert_turn";
    case Phase::critique: return "critique";
    case Phase::synthesis: return "synthesis";
    case Phase::final_summary: return "final_summary";
    case Phase::meeting_finished: return "meeting_finished";
    case Phase::meeting_failed: return "meeting_failed";
  }
  return "?";
}

Role parse_role(std::string_view s) {
  return parse_enum(s, std::array{Role::coordinator, Role::domain_expert, Role::critical_thinker}, "role");
}

MeetingKind parse_meeting_kind(std::string_view s) {
  return parse_enum(s, std::array{MeetingKind::team, MeetingKind::warmup}, "meeting kind");
}

MeetingStatus parse_meeting_status(std::string_view s) {
  return parse_enum(s, std::array{MeetingStatus::running, MeetingStatus::completed, MeetingStatus::failed},
                    "meeting status");
}

Media parse_media(std::string_view s) {
  return parse_enum(s, std::array{Media::plain_text, Media::markdown, Media::pdf_extracted}, "media");
}

Phase parse_phase(std::string_view s) {
  return parse_enum(s,
                    std::array{Phase::meeting_started, Phase::guidance, Phase::expert_turn, Phase::critique,
                               Phase::synthesis, Phase::final_summary, Phase::meeting_finished,
                               Phase::meeting_failed},
                    "phase");
}

bool is_content_phase(Phase p) {
  switch (p) {
    case Phase::guidance:
    case Phase::expert_turn:
    case Phase::critique:
    case Phase::synthesis:
    case Phase::final_summary:
      return true;
    default:
      return false;
  }
}

bool is_terminal_phase(Phase p) { return p == Phase::meeting_finished || p == Phase::meeting_failed; }

const AgentProfile& coordinator_profile() {
  static const AgentProfile profile{
      "system-coordinator",
      std::string(kCoordinatorName),
      Role::coordinator,
      "You lead the meeting. You keep every contribution focused on the agenda, integrate the experts' "
      "findings into a coherent position, resolve disagreements explicitly, and decide what the team must "
      "investigate next.",
      std::nullopt,
      true,
  };
  return profile;
}

const AgentProfile& critic_profile() {
  static const AgentProfile profile{
      "system-critic",
      std::string(kCriticName),
      Role::critical_thinker,
      "You are the team's reviewer. You hold every argument to a high analytical standard and name concrete "
      "weaknesses rather than general doubts.",
      std::nullopt,
      true,
  };
  return profile;
}

const AgentProfile* ProjectRecord::find_expert(std::string_view name) const {
  auto it = std::find_if(experts.begin(), experts.end(), [&](const AgentProfile& a) { return a.name == name; });
  return it == experts.end() ? nullptr : &*it;
}

AgentProfile* ProjectRecord::find_expert(std::string_view name) {
  auto it = std::find_if(experts.begin(), experts.end(), [&](const AgentProfile& a) { return a.name == name; });
  return it == experts.end() ? nullptr : &*it;
}

ProjectRecord create_project(std::string title, std::string description, std::vector<std::string> objectives,
                             IdGenerator& ids, Clock& clock) {
  if (text::trim(title).empty()) fail(ErrorKind::validation, "project title must be non-empty");
  ProjectRecord p;
  p.id = ids.next("prj");
  p.title = text::sanitize_utf8(text::trim(title));
  p.description = text::sanitize_utf8(description);
  for (auto& o : objectives) p.objectives.push_back(text::sanitize_utf8(o));
  p.created_at = format_timestamp(clock.now());
  return p;
}

const AgentProfile& add_expert(ProjectRecord& project, std::string name, std::string persona, IdGenerator& ids) {
  const std::string clean = text::sanitize_utf8(text::trim(name));
  if (clean.empty()) fail(ErrorKind::validation, "expert name must be non-empty");
  if (clean == kCoordinatorName || clean == kCriticName || clean == kSystemSpeaker) {
    fail(ErrorKind::conflict, "expert name '" + clean + "' is reserved for a system role");
  }
  if (project.find_expert(clean) != nullptr) {
    fail(ErrorKind::conflict, "expert '" + clean + "' already exists in project " + project.id);
  }
  AgentProfile expert;
  expert.id = ids.next("exp");
  expert.name = clean;
  expert.role = Role::domain_expert;
  expert.persona = text::sanitize_utf8(persona);
  expert.warmup_done = false;
  project.experts.push_back(std::move(expert));
  return project.experts.back();
}

std::vector<ConfigViolation> validate_meeting_config(const MeetingConfig& config, const ProjectRecord& project) {
  std::vector<ConfigViolation> out;
  if (config.project_id != project.id) {
    out.push_back({"project_id", "project_id does not match project " + project.id});
  }
  if (text::trim(config.agenda).empty()) out.push_back({"agenda", "agenda must be non-empty"});
  if (config.rounds < 1) out.push_back({"rounds", "rounds >= 1"});
  if (config.retrieval_k < 1) out.push_back({"retrieval_k", "retrieval_k >= 1"});
  if (config.context_budget < 1) out.push_back({"context_budget", "context_budget >= 1"});

  if (config.kind == MeetingKind::warmup) {
    if (config.participants.size() != 1) {
      out.push_back({"participants", "a warm-up meeting has exactly 1 participant"});
    }
  } else if (config.participants.empty()) {
    out.push_back({"participants", "a team meeting needs at least 1 expert"});
  }

  std::set<std::string_view> seen;
  for (const auto& name : config.participants) {
    if (!seen.insert(name).second) out.push_back({"participants", "duplicate participant '" + name + "'"});
    if (project.find_expert(name) == nullptr) {
      out.push_back({"participants", "unknown expert '" + name + "'"});
    }
  }
  return out;
}

}  // namespace thinktank
