#pragma once

#include <filesystem>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/knowledge/knowledge_store.hpp"
#include "thinktank/llm/gateway.hpp"
#include "thinktank/meeting/engine.hpp"
#include "thinktank/memory/note_store.hpp"
#include "thinktank/persistence/store.hpp"

namespace thinktank {

struct WorkspaceOptions {
  knowledge::ChunkingParams chunking;
  meeting::EngineOptions engine;
  /// Fail meetings left running by a dead process on startup.
  bool recover_on_open = true;
};

struct DocumentUpload {
  DocumentRef document;
  std::size_t chunk_count = 0;
};

/// Application layer shared by the service and the embedded CLI: owns the
/// stores and the engine, enforces one running meeting per project, and runs
/// meetings in the background when asked to.
class Workspace {
 public:
  Workspace(std::filesystem::path data_dir, llm::Gateway& gateway, Clock& clock, IdGenerator& ids,
            WorkspaceOptions options = {});
  ~Workspace();
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  ProjectRecord create_project(const std::string& title, const std::string& description,
                               const std::vector<std::string>& objectives);
  std::vector<ProjectRecord> list_projects() const;
  ProjectRecord project(const std::string& id) const;

  AgentProfile add_expert(const std::string& project_id, const std::string& name, const std::string& persona);
  /// Finds an expert by its opaque id across projects; returns (project id, expert).
  std::pair<std::string, AgentProfile> find_expert(const std::string& expert_id) const;

  /// Ingests into the expert's knowledge base, creating it on first upload.
  DocumentUpload upload_document(const std::string& project_id, const std::string& expert_name,
                                 const std::string& source_name, Media media, const std::string& content);

  /// Synchronous runs.
  MeetingMinutes run_meeting(const MeetingConfig& config, meeting::EventListener* listener = nullptr);
  meeting::WarmupReport run_warmup(const std::string& project_id, const std::string& expert_name,
                                   meeting::EventListener* listener = nullptr);

  using Completion = std::function<void(const std::string& meeting_id)>;
  /// Validates and registers synchronously, then runs on a background thread.
  /// Error(conflict) if the project already has a running meeting.
  std::string start_meeting(const MeetingConfig& config, std::shared_ptr<meeting::EventListener> listener,
                            Completion done = {});
  std::string start_warmup(const std::string& project_id, const std::string& expert_name,
                           std::shared_ptr<meeting::EventListener> listener, Completion done = {});

  bool is_running(const std::string& meeting_id) const;
  MeetingMinutes minutes(const std::string& meeting_id) const;
  std::string export_minutes(const std::string& meeting_id) const;
  std::vector<MeetingEvent> events(const std::string& meeting_id, std::uint64_t from_seq) const;

  /// Blocks until every background meeting has finished.
  void wait_idle();

  persistence::Store& store() noexcept { return store_; }
  knowledge::KnowledgeStore& knowledge() noexcept { return knowledge_; }
  memory::MemoryStore& memory() noexcept { return memory_; }
  meeting::MeetingEngine& engine() noexcept { return engine_; }
  llm::Gateway& gateway() noexcept { return gateway_; }

 private:
  class ProjectSlot;
  ProjectSlot claim(const std::string& project_id);
  void release(const std::string& project_id);
  std::string launch(const std::string& project_id, std::function<std::string()> open,
                     std::function<void(const std::string&)> run, Completion done);

  persistence::Store store_;
  llm::Gateway& gateway_;
  Clock& clock_;
  IdGenerator& ids_;
  knowledge::KnowledgeStore knowledge_;
  memory::MemoryStore memory_;
  meeting::MeetingEngine engine_;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  std::set<std::string> busy_projects_;
  std::set<std::string> running_meetings_;
  std::vector<std::thread> workers_;
};

}  // namespace thinktank
