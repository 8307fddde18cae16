#pragma once

#include <json.hpp>

#include "thinktank/model.hpp"

// JSON forms of the domain records. Field names are the on-disk and
// on-the-wire contract.
namespace thinktank {

void to_json(nlohmann::json& j, const AgentProfile& v);
void from_json(const nlohmann::json& j, AgentProfile& v);
void to_json(nlohmann::json& j, const DocumentRef& v);
void from_json(const nlohmann::json& j, DocumentRef& v);
void to_json(nlohmann::json& j, const ProjectRecord& v);
void from_json(const nlohmann::json& j, ProjectRecord& v);
void to_json(nlohmann::json& j, const MeetingConfig& v);
void from_json(const nlohmann::json& j, MeetingConfig& v);
void to_json(nlohmann::json& j, const MeetingEvent& v);
void from_json(const nlohmann::json& j, MeetingEvent& v);
void to_json(nlohmann::json& j, const ExpertTurn& v);
void from_json(const nlohmann::json& j, ExpertTurn& v);
void to_json(nlohmann::json& j, const RoundRecord& v);
void from_json(const nlohmann::json& j, RoundRecord& v);
/// The transcript is not part of this form; it lives in the event log.
void to_json(nlohmann::json& j, const MeetingMinutes& v);
void from_json(const nlohmann::json& j, MeetingMinutes& v);
void to_json(nlohmann::json& j, const ConfigViolation& v);

/// Compact, key-sorted, invalid UTF-8 replaced.
std::string dump_compact(const nlohmann::json& j);
std::string dump_pretty(const nlohmann::json& j);

}  // namespace thinktank
