#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "thinktank/model.hpp"
#include "thinktank/persistence/event_log.hpp"

namespace thinktank::persistence {

/// On-disk layout under one data directory:
///
///   thinktank-store.json                 format version
///   index/meetings/<meeting_id>          owning project id
///   projects/<id>/project.json
///   projects/<id>/.lock                  advisory single-writer lock
///   projects/<id>/kb/<kb_id>/            knowledge base (manifest + tables + vectors)
///   projects/<id>/notes/                 long-term notes
///   projects/<id>/meetings/<mid>/        minutes.json + events.log
class Store {
 public:
  static constexpr int kFormatVersion = 1;

  /// Creates the layout on first use; an unknown format version is an integrity error.
  explicit Store(std::filesystem::path root);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// THINKTANK_DATA_DIR, or ./thinktank-data.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path project_dir(const std::string& project_id) const;
  std::filesystem::path kb_dir(const std::string& project_id, const std::string& kb_id) const;
  std::filesystem::path notes_dir(const std::string& project_id) const;
  std::filesystem::path meeting_dir(const std::string& project_id, const std::string& meeting_id) const;

  /// Takes this process's writer lock on the project; Error(conflict) if another process holds it.
  void acquire_writer(const std::string& project_id);
  bool try_acquire_writer(const std::string& project_id);

  void save_project(const ProjectRecord& project);
  ProjectRecord load_project(const std::string& id) const;
  bool project_exists(const std::string& id) const;
  std::vector<ProjectRecord> list_projects() const;
  /// Serialized read-modify-write of one project record.
  ProjectRecord update_project(const std::string& id, const std::function<void(ProjectRecord&)>& mutate);

  void save_minutes(const std::string& project_id, const MeetingMinutes& minutes);
  /// Minutes with the transcript filled from the event log.
  MeetingMinutes load_minutes(const std::string& meeting_id) const;
  std::optional<std::string> meeting_project(const std::string& meeting_id) const;
  void index_meeting(const std::string& meeting_id, const std::string& project_id);

  void append_event(const std::string& meeting_id, const MeetingEvent& event);
  std::vector<MeetingEvent> read_events(const std::string& meeting_id, std::uint64_t from_seq = 1) const;

  /// Rendered minutes document; Error(state) unless the meeting completed.
  std::string export_minutes(const std::string& meeting_id) const;

  /// Marks meetings left running by a dead process as failed. Returns their ids.
  std::vector<std::string> recover_interrupted();

 private:
  std::string require_meeting_project(const std::string& meeting_id) const;
  EventLog& log_for(const std::string& meeting_id);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::mutex project_mu_;
  std::map<std::string, int> locks_;
  std::map<std::string, std::unique_ptr<EventLog>> logs_;
};

}  // namespace thinktank::persistence
