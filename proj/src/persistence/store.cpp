#include "thinktank/persistence/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>

#include "thinktank/clock.hpp"
#include "thinktank/error.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/fs_util.hpp"
#include "thinktank/persistence/minutes_export.hpp"

namespace thinktank::persistence {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRootManifest = "thinktank-store.json";

// Ids become path components; reject anything that could escape the layout.
void check_id(const std::string& id, std::string_view what) {
  const bool ok = !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
  if (!ok) fail(ErrorKind::not_found, "no " + std::string(what) + " with id '" + id + "'");
}

template <typename T>
T decode_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text).get<T>();
  } catch (const std::exception& e) {
    fail(ErrorKind::integrity, "corrupt record " + path.string() + ": " + e.what());
  }
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  const fs::path manifest = root_ / kRootManifest;
  if (!fs::exists(manifest)) {
    atomic_write_file(manifest, dump_pretty(json{{"format_version", kFormatVersion}}) + "\n");
  } else {
    int version = 0;
    try {
      version = json::parse(read_file(manifest)).at("format_version").get<int>();
    } catch (const json::exception& e) {
      fail(ErrorKind::integrity, "corrupt store manifest " + manifest.string() + ": " + e.what());
    }
    if (version != kFormatVersion) {
      fail(ErrorKind::integrity, "store format version " + std::to_string(version) + " in " + root_.string() +
                                     " needs migration to version " + std::to_string(kFormatVersion));
    }
  }
  fs::create_directories(root_ / "projects");
  fs::create_directories(root_ / "index" / "meetings");
}

Store::~Store() {
  for (auto& [_, fd] : locks_) ::close(fd);
}

fs::path Store::default_root() {
  if (const char* dir = std::getenv("THINKTANK_DATA_DIR"); dir != nullptr && *dir != '\0') return dir;
  return fs::current_path() / "thinktank-data";
}

fs::path Store::project_dir(const std::string& project_id) const {
  check_id(project_id, "project");
  return root_ / "projects" / project_id;
}

fs::path Store::kb_dir(const std::string& project_id, const std::string& kb_id) const {
  check_id(kb_id, "knowledge base");
  return project_dir(project_id) / "kb" / kb_id;
}

fs::path Store::notes_dir(const std::string& project_id) const { return project_dir(project_id) / "notes"; }

fs::path Store::meeting_dir(const std::string& project_id, const std::string& meeting_id) const {
  check_id(meeting_id, "meeting");
  return project_dir(project_id) / "meetings" / meeting_id;
}

bool Store::try_acquire_writer(const std::string& project_id) {
  const fs::path dir = project_dir(project_id);
  std::lock_guard lock(mu_);
  if (locks_.count(project_id) != 0) return true;
  fs::create_directories(dir);
  const fs::path lock_path = dir / ".lock";
  const int fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorKind::integrity, "cannot open lock file " + lock_path.string());
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    return false;
  }
  locks_[project_id] = fd;
  return true;
}

void Store::acquire_writer(const std::string& project_id) {
  if (!try_acquire_writer(project_id)) {
    fail(ErrorKind::conflict, "project " + project_id + " is locked by another writer process");
  }
}

void Store::save_project(const ProjectRecord& project) {
  acquire_writer(project.id);
  atomic_write_file(project_dir(project.id) / "project.json", dump_pretty(json(project)) + "\n");
}

ProjectRecord Store::load_project(const std::string& id) const {
  const fs::path path = project_dir(id) / "project.json";
  if (!fs::exists(path)) fail(ErrorKind::not_found, "no project with id '" + id + "'");
  return decode_file<ProjectRecord>(path);
}

bool Store::project_exists(const std::string& id) const {
  try {
    return fs::exists(project_dir(id) / "project.json");
  } catch (const Error&) {
    return false;
  }
}

std::vector<ProjectRecord> Store::list_projects() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_ / "projects")) {
    if (entry.is_directory() && fs::exists(entry.path() / "project.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<ProjectRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(load_project(id));
  return out;
}

ProjectRecord Store::update_project(const std::string& id, const std::function<void(ProjectRecord&)>& mutate) {
  std::lock_guard lock(project_mu_);
  ProjectRecord p = load_project(id);
  mutate(p);
  save_project(p);
  return p;
}

void Store::index_meeting(const std::string& meeting_id, const std::string& project_id) {
  check_id(meeting_id, "meeting");
  atomic_write_file(root_ / "index" / "meetings" / meeting_id, project_id);
}

std::optional<std::string> Store::meeting_project(const std::string& meeting_id) const {
  try {
    check_id(meeting_id, "meeting");
  } catch (const Error&) {
    return std::nullopt;
  }
  const fs::path path = root_ / "index" / "meetings" / meeting_id;
  if (!fs::exists(path)) return std::nullopt;
  return read_file(path);
}

std::string Store::require_meeting_project(const std::string& meeting_id) const {
  auto pid = meeting_project(meeting_id);
  if (!pid) fail(ErrorKind::not_found, "no meeting with id '" + meeting_id + "'");
  return *pid;
}

void Store::save_minutes(const std::string& project_id, const MeetingMinutes& minutes) {
  acquire_writer(project_id);
  atomic_write_file(meeting_dir(project_id, minutes.meeting_id) / "minutes.json", dump_pretty(json(minutes)) + "\n");
}

MeetingMinutes Store::load_minutes(const std::string& meeting_id) const {
  const std::string pid = require_meeting_project(meeting_id);
  const fs::path dir = meeting_dir(pid, meeting_id);
  if (!fs::exists(dir / "minutes.json")) fail(ErrorKind::not_found, "no minutes for meeting '" + meeting_id + "'");
  MeetingMinutes m = decode_file<MeetingMinutes>(dir / "minutes.json");
  m.transcript = EventLog::read(dir / "events.log");
  return m;
}

EventLog& Store::log_for(const std::string& meeting_id) {
  const std::string pid = require_meeting_project(meeting_id);
  std::lock_guard lock(mu_);
  auto& slot = logs_[meeting_id];
  if (!slot) slot = std::make_unique<EventLog>(meeting_dir(pid, meeting_id) / "events.log");
  return *slot;
}

void Store::append_event(const std::string& meeting_id, const MeetingEvent& event) {
  const std::string pid = require_meeting_project(meeting_id);
  acquire_writer(pid);
  log_for(meeting_id).append(event);
}

std::vector<MeetingEvent> Store::read_events(const std::string& meeting_id, std::uint64_t from_seq) const {
  const std::string pid = require_meeting_project(meeting_id);
  return EventLog::read(meeting_dir(pid, meeting_id) / "events.log", from_seq);
}

std::string Store::export_minutes(const std::string& meeting_id) const {
  const MeetingMinutes m = load_minutes(meeting_id);
  if (m.status == MeetingStatus::running) fail(ErrorKind::state, "meeting in progress: " + meeting_id);
  if (m.status == MeetingStatus::failed) {
    fail(ErrorKind::state, "meeting " + meeting_id + " failed and has no final minutes: " + m.failure_reason);
  }
  return render_minutes(m, load_project(m.config.project_id));
}

std::vector<std::string> Store::recover_interrupted() {
  std::vector<std::string> recovered;
  for (const auto& project : list_projects()) {
    for (const auto& mid : project.meetings) {
      const fs::path file = meeting_dir(project.id, mid) / "minutes.json";
      if (!fs::exists(file)) continue;
      MeetingMinutes m = decode_file<MeetingMinutes>(file);
      if (m.status != MeetingStatus::running) continue;
      if (!try_acquire_writer(project.id)) continue;  // a live writer owns it
      // Our own in-flight meetings are never seen here: recovery runs before any meeting starts.
      index_meeting(mid, project.id);
      MeetingEvent ev;
      ev.seq = log_for(mid).last_seq() + 1;
      ev.meeting_id = mid;
      ev.phase = Phase::meeting_failed;
      ev.speaker = std::string(kSystemSpeaker);
      ev.content = "interrupted: the process running this meeting stopped";
      ev.timestamp = format_timestamp(std::chrono::system_clock::now());
      append_event(mid, ev);
      m.status = MeetingStatus::failed;
      m.failure_reason = ev.content;
      save_minutes(project.id, m);
      recovered.push_back(mid);
    }
  }
  return recovered;
}

}  // namespace thinktank::persistence
