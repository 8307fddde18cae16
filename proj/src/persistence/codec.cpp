#include "thinktank/persistence/codec.hpp"

namespace thinktank {

using nlohmann::json;

void to_json(json& j, const AgentProfile& v) {
  j = json{{"id", v.id},
           {"name", v.name},
           {"role", to_string(v.role)},
           {"persona", v.persona},
           {"knowledge_base_id", v.knowledge_base_id ? json(*v.knowledge_base_id) : json(nullptr)},
           {"warmup_done", v.warmup_done}};
}

void from_json(const json& j, AgentProfile& v) {
  j.at("id").get_to(v.id);
  j.at("name").get_to(v.name);
  v.role = parse_role(j.at("role").get<std::string>());
  j.at("persona").get_to(v.persona);
  const json& kb = j.at("knowledge_base_id");
  v.knowledge_base_id = kb.is_null() ? std::nullopt : std::optional<std::string>(kb.get<std::string>());
  j.at("warmup_done").get_to(v.warmup_done);
}

void to_json(json& j, const DocumentRef& v) {
  j = json{{"doc_id", v.doc_id},         {"knowledge_base_id", v.knowledge_base_id},
           {"source_name", v.source_name}, {"media", to_string(v.media)},
           {"char_count", v.char_count},   {"ingested_at", v.ingested_at}};
}

void from_json(const json& j, DocumentRef& v) {
  j.at("doc_id").get_to(v.doc_id);
  j.at("knowledge_base_id").get_to(v.knowledge_base_id);
  j.at("source_name").get_to(v.source_name);
  v.media = parse_media(j.at("media").get<std::string>());
  j.at("char_count").get_to(v.char_count);
  j.at("ingested_at").get_to(v.ingested_at);
}

void to_json(json& j, const ProjectRecord& v) {
  j = json{{"id", v.id},           {"title", v.title},   {"description", v.description},
           {"objectives", v.objectives}, {"experts", v.experts}, {"corpus", v.corpus},
           {"meetings", v.meetings},     {"created_at", v.created_at}};
}

void from_json(const json& j, ProjectRecord& v) {
  j.at("id").get_to(v.id);
  j.at("title").get_to(v.title);
  j.at("description").get_to(v.description);
  j.at("objectives").get_to(v.objectives);
  j.at("experts").get_to(v.experts);
  j.at("corpus").get_to(v.corpus);
  j.at("meetings").get_to(v.meetings);
  j.at("created_at").get_to(v.created_at);
}

void to_json(json& j, const MeetingConfig& v) {
  j = json{{"project_id", v.project_id},     {"agenda", v.agenda},
           {"rounds", v.rounds},             {"participants", v.participants},
           {"kind", to_string(v.kind)},      {"retrieval_k", v.retrieval_k},
           {"context_budget", v.context_budget}};
}

void from_json(const json& j, MeetingConfig& v) {
  j.at("project_id").get_to(v.project_id);
  j.at("agenda").get_to(v.agenda);
  j.at("rounds").get_to(v.rounds);
  j.at("participants").get_to(v.participants);
  v.kind = parse_meeting_kind(j.at("kind").get<std::string>());
  j.at("retrieval_k").get_to(v.retrieval_k);
  j.at("context_budget").get_to(v.context_budget);
}

void to_json(json& j, const MeetingEvent& v) {
  j = json{{"seq", v.seq},           {"meeting_id", v.meeting_id}, {"phase", to_string(v.phase)},
           {"speaker", v.speaker},   {"content", v.content},       {"round", v.round},
           {"timestamp", v.timestamp}};
}

void from_json(const json& j, MeetingEvent& v) {
  j.at("seq").get_to(v.seq);
  j.at("meeting_id").get_to(v.meeting_id);
  v.phase = parse_phase(j.at("phase").get<std::string>());
  j.at("speaker").get_to(v.speaker);
  j.at("content").get_to(v.content);
  j.at("round").get_to(v.round);
  j.at("timestamp").get_to(v.timestamp);
}

void to_json(json& j, const ExpertTurn& v) { j = json{{"speaker", v.speaker}, {"content", v.content}}; }

void from_json(const json& j, ExpertTurn& v) {
  j.at("speaker").get_to(v.speaker);
  j.at("content").get_to(v.content);
}

void to_json(json& j, const RoundRecord& v) {
  j = json{{"round", v.round},       {"guidance", v.guidance},   {"expert_turns", v.expert_turns},
           {"critique", v.critique}, {"synthesis", v.synthesis}, {"follow_up_questions", v.follow_up_questions}};
}

void from_json(const json& j, RoundRecord& v) {
  j.at("round").get_to(v.round);
  j.at("guidance").get_to(v.guidance);
  j.at("expert_turns").get_to(v.expert_turns);
  j.at("critique").get_to(v.critique);
  j.at("synthesis").get_to(v.synthesis);
  j.at("follow_up_questions").get_to(v.follow_up_questions);
}

void to_json(json& j, const MeetingMinutes& v) {
  j = json{{"meeting_id", v.meeting_id},
           {"config", v.config},
           {"status", to_string(v.status)},
           {"per_round", v.per_round},
           {"final_summary", v.final_summary},
           {"final_summary_failed", v.final_summary_failed},
           {"failure_reason", v.failure_reason}};
}

void from_json(const json& j, MeetingMinutes& v) {
  j.at("meeting_id").get_to(v.meeting_id);
  j.at("config").get_to(v.config);
  v.status = parse_meeting_status(j.at("status").get<std::string>());
  j.at("per_round").get_to(v.per_round);
  j.at("final_summary").get_to(v.final_summary);
  j.at("final_summary_failed").get_to(v.final_summary_failed);
  j.at("failure_reason").get_to(v.failure_reason);
}

void to_json(json& j, const ConfigViolation& v) { j = json{{"field", v.field}, {"message", v.message}}; }

std::string dump_compact(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

std::string dump_pretty(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace); }

}  // namespace thinktank
