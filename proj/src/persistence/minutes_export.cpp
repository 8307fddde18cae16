#include "thinktank/persistence/minutes_export.hpp"

#include <sstream>

namespace thinktank::persistence {

std::string render_minutes(const MeetingMinutes& minutes, const ProjectRecord& project) {
  std::ostringstream out;
  out << "# Meeting Minutes: " << project.title << "\n\n";
  out << "Meeting: " << minutes.meeting_id << "\n";
  out << "Project: " << project.id << "\n";
  out << "Kind: " << to_string(minutes.config.kind) << "\n";
  out << "Rounds: " << minutes.config.rounds << "\n\n";

  out << "## Agenda\n\n" << minutes.config.agenda << "\n\n";

  out << "## Participants\n\n";
  out << "- " << kCoordinatorName << " (" << to_string(Role::coordinator) << ")\n";
  for (const auto& name : minutes.config.participants) {
    out << "- " << name << " (" << to_string(Role::domain_expert) << ")\n";
  }
  if (minutes.config.kind == MeetingKind::team) {
    out << "- " << kCriticName << " (" << to_string(Role::critical_thinker) << ")\n";
  }
  out << "\n";

  for (const auto& round : minutes.per_round) {
    out << "## Round " << round.round << " Synthesis\n\n" << round.synthesis << "\n\n";
    out << "## Round " << round.round << " Follow-ups\n\n";
    if (round.follow_up_questions.empty()) {
      out << "None.\n";
    } else {
      for (std::size_t i = 0; i < round.follow_up_questions.size(); ++i) {
        out << (i + 1) << ". " << round.follow_up_questions[i] << "\n";
      }
    }
    out << "\n";
  }

  out << "## Final Summary\n\n" << minutes.final_summary << "\n";
  return out.str();
}

}  // namespace thinktank::persistence
