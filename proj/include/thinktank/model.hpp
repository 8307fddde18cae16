#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thinktank/clock.hpp"

namespace thinktank {

enum class Role { coordinator, domain_expert, critical_thinker };
enum class MeetingKind { team, warmup };
enum class MeetingStatus { running, completed, failed };
enum class Media { plain_text, markdown, pdf_extracted };

enum class Phase {
  meeting_started,
  guidance,
  expert_turn,
  critique,
  synthesis,
  final_summary,
  meeting_finished,
  meeting_failed,
};

std::string_view to_string(Role v);
std::string_view to_string(MeetingKind v);
std::string_view to_string(MeetingStatus v);
std::string_view to_string(Media v);
std::string_view to_string(Phase v);

// Parsers throw Error(validation) on unknown names.
Role parse_role(std::string_view s);
MeetingKind parse_meeting_kind(std::string_view s);
MeetingStatus parse_meeting_status(std::string_view s);
Media parse_media(std::string_view s);
Phase parse_phase(std::string_view s);

/// Phases that carry agent-authored content (the ones counted by the turn law).
bool is_content_phase(Phase p);
bool is_terminal_phase(Phase p);

inline constexpr std::string_view kCoordinatorName = "Coordinator";
inline constexpr std::string_view kCriticName = "Critical Thinker";
inline constexpr std::string_view kSystemSpeaker = "system";

struct AgentProfile {
  std::string id;
  std::string name;
  Role role = Role::domain_expert;
  std::string persona;
  std::optional<std::string> knowledge_base_id;
  bool warmup_done = false;

  bool operator==(const AgentProfile&) const = default;
};

/// Framework-provided roles; never stored in a project's expert roster.
const AgentProfile& coordinator_profile();
const AgentProfile& critic_profile();

struct DocumentRef {
  std::string doc_id;
  std::string knowledge_base_id;
  std::string source_name;
  Media media = Media::plain_text;
  std::uint64_t char_count = 0;
  std::string ingested_at;

  bool operator==(const DocumentRef&) const = default;
};

struct ProjectRecord {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> objectives;
  std::vector<AgentProfile> experts;
  std::vector<DocumentRef> corpus;
  std::vector<std::string> meetings;
  std::string created_at;

  const AgentProfile* find_expert(std::string_view name) const;
  AgentProfile* find_expert(std::string_view name);

  bool operator==(const ProjectRecord&) const = default;
};

struct MeetingConfig {
  std::string project_id;
  std::string agenda;
  int rounds = 1;
  std::vector<std::string> participants;
  MeetingKind kind = MeetingKind::team;
  int retrieval_k = 5;
  int context_budget = 8000;

  bool operator==(const MeetingConfig&) const = default;
};

struct MeetingEvent {
  std::uint64_t seq = 0;
  std::string meeting_id;
  Phase phase = Phase::meeting_started;
  std::string speaker;
  std::string content;
  int round = 0;
  std::string timestamp;

  bool operator==(const MeetingEvent&) const = default;
};

struct ExpertTurn {
  std::string speaker;
  std::string content;

  bool operator==(const ExpertTurn&) const = default;
};

struct RoundRecord {
  int round = 0;
  std::string guidance;
  std::vector<ExpertTurn> expert_turns;
  std::string critique;
  std::string synthesis;
  std::vector<std::string> follow_up_questions;

  bool operator==(const RoundRecord&) const = default;
};

struct MeetingMinutes {
  std::string meeting_id;
  MeetingConfig config;
  MeetingStatus status = MeetingStatus::running;
  std::vector<RoundRecord> per_round;
  std::string final_summary;
  bool final_summary_failed = false;
  std::string failure_reason;
  std::vector<MeetingEvent> transcript;

  bool operator==(const MeetingMinutes&) const = default;
};

struct ConfigViolation {
  std::string field;
  std::string message;

  bool operator==(const ConfigViolation&) const = default;
};

ProjectRecord create_project(std::string title, std::string description, std::vector<std::string> objectives,
                             IdGenerator& ids, Clock& clock);

/// Appends a domain expert; throws Error(conflict) on a duplicate name.
const AgentProfile& add_expert(ProjectRecord& project, std::string name, std::string persona, IdGenerator& ids);

/// Returns every violated invariant; an empty list means the config is runnable.
std::vector<ConfigViolation> validate_meeting_config(const MeetingConfig& config, const ProjectRecord& project);

}  // namespace thinktank
