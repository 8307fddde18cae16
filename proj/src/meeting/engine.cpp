#include "thinktank/meeting/engine.hpp"

#include <algorithm>

#include "thinktank/error.hpp"
#include "thinktank/meeting/synthesis_parser.hpp"
#include "thinktank/text.hpp"

namespace thinktank::meeting {

/// Assigns sequence numbers, persists, then notifies.
class MeetingEngine::Recorder {
 public:
  Recorder(persistence::Store& store, Clock& clock, MeetingMinutes& minutes, EventListener* listener)
      : store_(store), clock_(clock), minutes_(minutes), listener_(listener) {}

  void emit(Phase phase, std::string_view speaker, int round, std::string content) {
    MeetingEvent ev;
    ev.seq = minutes_.transcript.empty() ? 1 : minutes_.transcript.back().seq + 1;
    ev.meeting_id = minutes_.meeting_id;
    ev.phase = phase;
    ev.speaker = std::string(speaker);
    ev.content = std::move(content);
    ev.round = round;
    ev.timestamp = format_timestamp(clock_.now());
    store_.append_event(minutes_.meeting_id, ev);
    minutes_.transcript.push_back(ev);
    if (listener_ != nullptr) listener_->on_event(minutes_.transcript.back());
  }

 private:
  persistence::Store& store_;
  Clock& clock_;
  MeetingMinutes& minutes_;
  EventListener* listener_;
};

namespace {

void save(persistence::Store& store, const MeetingMinutes& m) { store.save_minutes(m.config.project_id, m); }

}  // namespace

MeetingEngine::MeetingEngine(persistence::Store& store, knowledge::KnowledgeStore& knowledge,
                             memory::MemoryStore& memory, llm::Gateway& gateway, Clock& clock, IdGenerator& ids,
                             EngineOptions options)
    : store_(store),
      knowledge_(knowledge),
      memory_(memory),
      gateway_(gateway),
      clock_(clock),
      ids_(ids),
      options_(std::move(options)) {
  if (options_.warmup_batch == 0) fail(ErrorKind::validation, "warm-up batch size must be positive");
}

std::string MeetingEngine::call(const llm::ChatRequest& request) { return gateway_.chat(request); }

std::string MeetingEngine::register_meeting(const MeetingConfig& config) {
  store_.acquire_writer(config.project_id);
  const std::string id = ids_.next("mtg");
  store_.index_meeting(id, config.project_id);
  MeetingMinutes minutes;
  minutes.meeting_id = id;
  minutes.config = config;
  minutes.status = MeetingStatus::running;
  save(store_, minutes);
  store_.update_project(config.project_id, [&](ProjectRecord& p) { p.meetings.push_back(id); });
  return id;
}

std::string MeetingEngine::open_meeting(const MeetingConfig& config) {
  const ProjectRecord project = store_.load_project(config.project_id);
  auto violations = validate_meeting_config(config, project);
  if (config.kind != MeetingKind::team) {
    violations.push_back({"kind", "use a warm-up session for single-expert preparation"});
  }
  for (const auto& name : config.participants) {
    const AgentProfile* e = project.find_expert(name);
    if (e != nullptr && e->knowledge_base_id && !knowledge_.exists(project.id, *e->knowledge_base_id)) {
      violations.push_back({"participants", "knowledge base of expert '" + name + "' cannot be resolved"});
    }
  }
  if (!violations.empty()) {
    std::vector<std::string> details;
    for (const auto& v : violations) details.push_back(v.field + ": " + v.message);
    throw Error(ErrorKind::validation, "invalid meeting config: " + details.front(), details);
  }
  return register_meeting(config);
}

RoundRecord MeetingEngine::run_round(Recorder& rec, const ProjectRecord& project, const MeetingConfig& config,
                                     int round, const CarriedContext& carried) {
  const auto budget = static_cast<std::size_t>(config.context_budget);
  const auto k = static_cast<std::size_t>(config.retrieval_k);
  RoundRecord out;
  out.round = round;

  std::vector<memory::ScoredNote> project_memory;
  if (round == 1) project_memory = memory_.recall_notes(std::string(kCoordinatorName), project.id, config.agenda, k);
  out.guidance = call(assemble_guidance_prompt(project, config, round, carried, project_memory, options_.prompts));
  rec.emit(Phase::guidance, kCoordinatorName, round, out.guidance);

  const std::string query = config.agenda + "\n" + out.guidance;
  for (const auto& name : config.participants) {
    const AgentProfile& expert = *project.find_expert(name);
    std::vector<knowledge::ScoredChunk> retrieved;
    if (expert.knowledge_base_id) {
      const auto hits = knowledge_.retrieve(project.id, *expert.knowledge_base_id, query, k);
      retrieved = knowledge::adaptive_filter(hits);
    }
    const auto notes = memory_.recall_notes(expert.name, project.id, query, k);

    ExpertPromptInput in;
    in.expert = &expert;
    in.agenda = config.agenda;
    in.guidance = out.guidance;
    in.prior_turns = out.expert_turns;
    in.carried = &carried;
    in.retrieved = retrieved;
    in.has_knowledge_base = expert.knowledge_base_id.has_value();
    in.recalled_notes = notes;
    in.context_budget = budget;
    in.round = round;
    std::string turn = call(assemble_expert_prompt(in, options_.prompts));
    rec.emit(Phase::expert_turn, expert.name, round, turn);
    out.expert_turns.push_back(ExpertTurn{expert.name, std::move(turn)});
  }

  out.critique = call(assemble_critic_prompt(config.agenda, out.expert_turns, carried, budget, round, options_.prompts));
  rec.emit(Phase::critique, kCriticName, round, out.critique);

  const bool final_round = round >= config.rounds;
  const auto request = assemble_synthesis_prompt(config.agenda, out.guidance, out.expert_turns, out.critique, carried,
                                                 round, config.rounds, budget, options_.prompts);
  // A non-final round without follow-up questions cannot feed the next round; ask once for a reformat.
  const auto acceptable = [&](const std::optional<ParsedSynthesis>& p) {
    return p && (final_round || !p->follow_up_questions.empty());
  };
  std::string reply = call(request);
  auto parsed = parse_synthesis(reply);
  if (!acceptable(parsed)) {
    reply = call(assemble_reformat_request(request, reply));
    auto second = parse_synthesis(reply);
    if (acceptable(second)) parsed = std::move(second);
    else if (!parsed) parsed = second ? std::move(second) : degrade_synthesis(reply);
  }
  out.synthesis = parsed->synthesis;
  out.follow_up_questions = parsed->follow_up_questions;
  rec.emit(Phase::synthesis, kCoordinatorName, round, render_synthesis(*parsed));

  if (options_.remember_syntheses) {
    memory_.store_note(std::string(kCoordinatorName), project.id, out.synthesis, memory::NoteOrigin::round_synthesis);
  }
  return out;
}

MeetingMinutes MeetingEngine::execute(const std::string& meeting_id, EventListener* listener) {
  MeetingMinutes minutes = store_.load_minutes(meeting_id);
  if (minutes.status != MeetingStatus::running || !minutes.transcript.empty()) {
    fail(ErrorKind::state, "meeting " + meeting_id + " has already been executed");
  }
  if (minutes.config.kind != MeetingKind::team) fail(ErrorKind::state, "meeting " + meeting_id + " is a warm-up");
  const ProjectRecord project = store_.load_project(minutes.config.project_id);
  const MeetingConfig& config = minutes.config;
  Recorder rec(store_, clock_, minutes, listener);

  bool in_final = false;
  try {
    rec.emit(Phase::meeting_started, kSystemSpeaker, 0, config.agenda);
    CarriedContext carried;
    for (int r = 1; r <= config.rounds; ++r) {
      minutes.per_round.push_back(run_round(rec, project, config, r, carried));
      const auto& done = minutes.per_round.back();
      carried = CarriedContext{r, done.synthesis, done.follow_up_questions};
      save(store_, minutes);
    }
    in_final = true;
    minutes.final_summary =
        call(assemble_final_prompt(config.agenda, minutes.per_round, static_cast<std::size_t>(config.context_budget),
                                   options_.prompts));
    rec.emit(Phase::final_summary, kCoordinatorName, 0, minutes.final_summary);
    minutes.status = MeetingStatus::completed;
    save(store_, minutes);
    rec.emit(Phase::meeting_finished, kSystemSpeaker, 0, "completed");
  } catch (const std::exception& e) {
    if (minutes.status == MeetingStatus::completed) throw;  // only the closing event failed to persist
    minutes.status = MeetingStatus::failed;
    minutes.final_summary_failed = in_final;
    minutes.failure_reason = e.what();
    // Persist the status first so a client reacting to the terminal event reads final minutes.
    save(store_, minutes);
    try {
      rec.emit(Phase::meeting_failed, kSystemSpeaker, 0, e.what());
    } catch (...) {
    }
    throw;
  }
  return minutes;
}

MeetingMinutes MeetingEngine::run_meeting(const MeetingConfig& config, EventListener* listener) {
  return execute(open_meeting(config), listener);
}

std::string MeetingEngine::open_warmup(const std::string& project_id, const std::string& expert_name) {
  const ProjectRecord project = store_.load_project(project_id);
  const AgentProfile* expert = project.find_expert(expert_name);
  if (expert == nullptr) fail(ErrorKind::not_found, "no expert '" + expert_name + "' in project " + project_id);
  if (!expert->knowledge_base_id) fail(ErrorKind::state, "expert '" + expert_name + "' has no knowledge base");
  const std::size_t chunks = knowledge_.open(project_id, *expert->knowledge_base_id)->chunk_count();
  if (chunks == 0) fail(ErrorKind::state, "knowledge base of expert '" + expert_name + "' is empty");

  MeetingConfig config;
  config.project_id = project_id;
  config.kind = MeetingKind::warmup;
  config.participants = {expert_name};
  config.agenda = "Warm-up: " + expert_name + " studies their knowledge base";
  config.rounds = static_cast<int>((chunks + options_.warmup_batch - 1) / options_.warmup_batch);
  if (const auto violations = validate_meeting_config(config, project); !violations.empty()) {
    fail(ErrorKind::validation, violations.front().field + ": " + violations.front().message);
  }
  return register_meeting(config);
}

WarmupReport MeetingEngine::execute_warmup(const std::string& meeting_id, EventListener* listener) {
  MeetingMinutes minutes = store_.load_minutes(meeting_id);
  if (minutes.status != MeetingStatus::running || !minutes.transcript.empty()) {
    fail(ErrorKind::state, "meeting " + meeting_id + " has already been executed");
  }
  if (minutes.config.kind != MeetingKind::warmup) fail(ErrorKind::state, "meeting " + meeting_id + " is not a warm-up");
  const ProjectRecord project = store_.load_project(minutes.config.project_id);
  const std::string& name = minutes.config.participants.front();
  const AgentProfile& expert = *project.find_expert(name);
  Recorder rec(store_, clock_, minutes, listener);

  WarmupReport report;
  report.meeting_id = meeting_id;
  try {
    rec.emit(Phase::meeting_started, kSystemSpeaker, 0, minutes.config.agenda);
    const auto chunks = knowledge_.open(project.id, *expert.knowledge_base_id)->chunks();
    const std::size_t batch = options_.warmup_batch;
    const int batches = static_cast<int>((chunks.size() + batch - 1) / batch);
    minutes.config.rounds = batches;
    for (int b = 0; b < batches; ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * batch;
      const std::size_t end = std::min(begin + batch, chunks.size());
      const std::span<const knowledge::ChunkRecord> slice(chunks.data() + begin, end - begin);
      std::size_t budget = static_cast<std::size_t>(minutes.config.context_budget);
      for (const auto& c : slice) budget += text::char_count(c.text) + 64;

      std::string notes = call(assemble_warmup_prompt(expert, project, slice, b + 1, batches, budget, options_.prompts));
      rec.emit(Phase::expert_turn, expert.name, b + 1, notes);
      report.note_ids.push_back(memory_.store_note(expert.name, project.id, notes, memory::NoteOrigin::warmup).note_id);

      RoundRecord r;
      r.round = b + 1;
      r.expert_turns.push_back(ExpertTurn{expert.name, notes});
      r.synthesis = std::move(notes);
      minutes.per_round.push_back(std::move(r));
      ++report.batches;
    }
    const auto count = [](std::size_t n, const char* noun) {
      return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
    };
    minutes.final_summary = "Warm-up of " + expert.name + " stored " + count(report.note_ids.size(), "note") +
                            " from " + count(chunks.size(), "chunk") + ".";
    rec.emit(Phase::final_summary, kSystemSpeaker, 0, minutes.final_summary);
    store_.update_project(project.id, [&](ProjectRecord& p) {
      if (AgentProfile* e = p.find_expert(name)) e->warmup_done = true;
    });
    minutes.status = MeetingStatus::completed;
    save(store_, minutes);
    rec.emit(Phase::meeting_finished, kSystemSpeaker, 0, "completed");
  } catch (const std::exception& e) {
    if (minutes.status == MeetingStatus::completed) throw;
    minutes.status = MeetingStatus::failed;
    minutes.failure_reason = e.what();
    // Persist the status first so a client reacting to the terminal event reads final minutes.
    save(store_, minutes);
    try {
      rec.emit(Phase::meeting_failed, kSystemSpeaker, 0, e.what());
    } catch (...) {
    }
    throw;
  }
  return report;
}

WarmupReport MeetingEngine::run_warmup(const std::string& project_id, const std::string& expert_name,
                                       EventListener* listener) {
  return execute_warmup(open_warmup(project_id, expert_name), listener);
}

}  // namespace thinktank::meeting
