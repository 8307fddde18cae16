#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/knowledge/knowledge_store.hpp"
#include "thinktank/llm/gateway.hpp"
#include "thinktank/meeting/prompts.hpp"
#include "thinktank/memory/note_store.hpp"
#include "thinktank/model.hpp"
#include "thinktank/persistence/store.hpp"

namespace thinktank::meeting {

/// Receives every event after it has been persisted.
class EventListener {
 public:
  virtual ~EventListener() = default;
  virtual void on_event(const MeetingEvent& event) = 0;
};

struct EngineOptions {
  PromptSettings prompts;
  std::size_t warmup_batch = 10;
  /// Coordinator syntheses are also kept as long-term project notes.
  bool remember_syntheses = true;
};

struct WarmupReport {
  std::string meeting_id;
  std::size_t batches = 0;
  std::vector<std::string> note_ids;
};

/// Runs team meetings (R rounds of guidance, sequential expert turns, critique
/// and synthesis, then a final summary) and single-expert warm-ups.
class MeetingEngine {
 public:
  MeetingEngine(persistence::Store& store, knowledge::KnowledgeStore& knowledge, memory::MemoryStore& memory,
                llm::Gateway& gateway, Clock& clock, IdGenerator& ids, EngineOptions options = {});

  /// Validates and registers a team meeting; no events are written on failure.
  /// Error(validation) carries one detail per violated invariant.
  std::string open_meeting(const MeetingConfig& config);
  /// Runs a registered meeting to completion. On a gateway failure the log is
  /// closed with meeting_failed, the minutes are marked failed, and the error is rethrown.
  MeetingMinutes execute(const std::string& meeting_id, EventListener* listener = nullptr);
  MeetingMinutes run_meeting(const MeetingConfig& config, EventListener* listener = nullptr);

  /// Error(state) when the expert has no knowledge base or it holds no chunks.
  std::string open_warmup(const std::string& project_id, const std::string& expert_name);
  WarmupReport execute_warmup(const std::string& meeting_id, EventListener* listener = nullptr);
  WarmupReport run_warmup(const std::string& project_id, const std::string& expert_name,
                          EventListener* listener = nullptr);

  const EngineOptions& options() const noexcept { return options_; }

 private:
  class Recorder;

  std::string register_meeting(const MeetingConfig& config);
  RoundRecord run_round(Recorder& rec, const ProjectRecord& project, const MeetingConfig& config, int round,
                        const CarriedContext& carried);
  std::string call(const llm::ChatRequest& request);

  persistence::Store& store_;
  knowledge::KnowledgeStore& knowledge_;
  memory::MemoryStore& memory_;
  llm::Gateway& gateway_;
  Clock& clock_;
  IdGenerator& ids_;
  EngineOptions options_;
};

}  // namespace thinktank::meeting
