#include "thinktank/workspace.hpp"

#include <iostream>

#include "thinktank/error.hpp"

namespace thinktank {

class Workspace::ProjectSlot {
 public:
  ProjectSlot(Workspace* ws, std::string project_id) : ws_(ws), project_id_(std::move(project_id)) {}
  ProjectSlot(ProjectSlot&& other) noexcept : ws_(std::exchange(other.ws_, nullptr)), project_id_(other.project_id_) {}
  ProjectSlot(const ProjectSlot&) = delete;
  ProjectSlot& operator=(const ProjectSlot&) = delete;
  ProjectSlot& operator=(ProjectSlot&&) = delete;
  ~ProjectSlot() { release(); }

  void release() {
    if (ws_ != nullptr) std::exchange(ws_, nullptr)->release(project_id_);
  }

 private:
  Workspace* ws_;
  std::string project_id_;
};

Workspace::Workspace(std::filesystem::path data_dir, llm::Gateway& gateway, Clock& clock, IdGenerator& ids,
                     WorkspaceOptions options)
    : store_(std::move(data_dir)),
      gateway_(gateway),
      clock_(clock),
      ids_(ids),
      knowledge_(store_, gateway, clock, ids, options.chunking),
      memory_(store_, gateway, clock, ids),
      engine_(store_, knowledge_, memory_, gateway, clock, ids, options.engine) {
  if (options.recover_on_open) store_.recover_interrupted();
}

Workspace::~Workspace() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

ProjectRecord Workspace::create_project(const std::string& title, const std::string& description,
                                        const std::vector<std::string>& objectives) {
  ProjectRecord p = thinktank::create_project(title, description, objectives, ids_, clock_);
  store_.save_project(p);
  return p;
}

std::vector<ProjectRecord> Workspace::list_projects() const { return store_.list_projects(); }

ProjectRecord Workspace::project(const std::string& id) const { return store_.load_project(id); }

AgentProfile Workspace::add_expert(const std::string& project_id, const std::string& name,
                                   const std::string& persona) {
  AgentProfile added;
  store_.update_project(project_id, [&](ProjectRecord& p) { added = thinktank::add_expert(p, name, persona, ids_); });
  return added;
}

std::pair<std::string, AgentProfile> Workspace::find_expert(const std::string& expert_id) const {
  for (const auto& p : store_.list_projects()) {
    for (const auto& e : p.experts) {
      if (e.id == expert_id) return {p.id, e};
    }
  }
  fail(ErrorKind::not_found, "no expert with id '" + expert_id + "'");
}

DocumentUpload Workspace::upload_document(const std::string& project_id, const std::string& expert_name,
                                          const std::string& source_name, Media media, const std::string& content) {
  const ProjectRecord p = store_.load_project(project_id);
  const AgentProfile* expert = p.find_expert(expert_name);
  if (expert == nullptr) fail(ErrorKind::not_found, "no expert '" + expert_name + "' in project " + project_id);

  std::string kb_id;
  if (expert->knowledge_base_id) {
    kb_id = *expert->knowledge_base_id;
  } else {
    kb_id = knowledge_.create_knowledge_base(project_id);
    store_.update_project(project_id, [&](ProjectRecord& rec) {
      if (AgentProfile* e = rec.find_expert(expert_name); e != nullptr && !e->knowledge_base_id) {
        e->knowledge_base_id = kb_id;
      }
      kb_id = *rec.find_expert(expert_name)->knowledge_base_id;
    });
  }
  const auto result = knowledge_.ingest_document(project_id, kb_id, source_name, content, media);
  store_.update_project(project_id, [&](ProjectRecord& rec) { rec.corpus.push_back(result.document); });
  return DocumentUpload{result.document, result.chunk_count};
}

Workspace::ProjectSlot Workspace::claim(const std::string& project_id) {
  std::lock_guard lock(mu_);
  if (!busy_projects_.insert(project_id).second) {
    fail(ErrorKind::conflict, "project " + project_id + " already has a meeting in progress");
  }
  return ProjectSlot(this, project_id);
}

void Workspace::release(const std::string& project_id) {
  {
    std::lock_guard lock(mu_);
    busy_projects_.erase(project_id);
  }
  idle_cv_.notify_all();
}

MeetingMinutes Workspace::run_meeting(const MeetingConfig& config, meeting::EventListener* listener) {
  store_.load_project(config.project_id);
  ProjectSlot slot = claim(config.project_id);
  const std::string id = engine_.open_meeting(config);
  {
    std::lock_guard lock(mu_);
    running_meetings_.insert(id);
  }
  struct Done {
    Workspace* ws;
    std::string id;
    ~Done() {
      std::lock_guard lock(ws->mu_);
      ws->running_meetings_.erase(id);
    }
  } done{this, id};
  return engine_.execute(id, listener);
}

meeting::WarmupReport Workspace::run_warmup(const std::string& project_id, const std::string& expert_name,
                                            meeting::EventListener* listener) {
  store_.load_project(project_id);
  ProjectSlot slot = claim(project_id);
  return engine_.run_warmup(project_id, expert_name, listener);
}

std::string Workspace::launch(const std::string& project_id, std::function<std::string()> open,
                              std::function<void(const std::string&)> run, Completion done) {
  store_.load_project(project_id);
  auto slot = std::make_shared<ProjectSlot>(claim(project_id));
  const std::string id = open();
  std::lock_guard lock(mu_);
  running_meetings_.insert(id);
  workers_.emplace_back([this, slot, id, run = std::move(run), done = std::move(done)]() mutable {
    try {
      run(id);
    } catch (const std::exception& e) {
      std::cerr << "thinktank: meeting " << id << " failed: " << e.what() << "\n";
    }
    {
      std::lock_guard inner(mu_);
      running_meetings_.erase(id);
    }
    slot->release();
    if (done) done(id);
  });
  return id;
}

std::string Workspace::start_meeting(const MeetingConfig& config, std::shared_ptr<meeting::EventListener> listener,
                                     Completion done) {
  return launch(
      config.project_id, [&] { return engine_.open_meeting(config); },
      [this, listener](const std::string& id) { engine_.execute(id, listener.get()); }, std::move(done));
}

std::string Workspace::start_warmup(const std::string& project_id, const std::string& expert_name,
                                    std::shared_ptr<meeting::EventListener> listener, Completion done) {
  return launch(
      project_id, [&] { return engine_.open_warmup(project_id, expert_name); },
      [this, listener](const std::string& id) { engine_.execute_warmup(id, listener.get()); }, std::move(done));
}

bool Workspace::is_running(const std::string& meeting_id) const {
  std::lock_guard lock(mu_);
  return running_meetings_.count(meeting_id) != 0;
}

MeetingMinutes Workspace::minutes(const std::string& meeting_id) const { return store_.load_minutes(meeting_id); }

std::string Workspace::export_minutes(const std::string& meeting_id) const {
  return store_.export_minutes(meeting_id);
}

std::vector<MeetingEvent> Workspace::events(const std::string& meeting_id, std::uint64_t from_seq) const {
  return store_.read_events(meeting_id, from_seq);
}

void Workspace::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return busy_projects_.empty(); });
}

}  // namespace thinktank
