#include "thinktank/memory/note_store.hpp"

#include <algorithm>
#include <array>

#include <json.hpp>

#include "thinktank/error.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/fs_util.hpp"
#include "thinktank/persistence/store.hpp"
#include "thinktank/text.hpp"

namespace thinktank::memory {
using nlohmann::json;

namespace {

constexpr const char* kNotes = "notes.jsonl";
constexpr const char* kVectors = "vectors.f32";

}  // namespace

std::string_view to_string(NoteOrigin o) {
  switch (o) {
    case NoteOrigin::warmup: return "warmup";
    case NoteOrigin::round_synthesis: return "round_synthesis";
    case NoteOrigin::manual: return "manual";
  }
  return "manual";
}

NoteOrigin parse_note_origin(std::string_view s) {
  for (auto o : std::array{NoteOrigin::warmup, NoteOrigin::round_synthesis, NoteOrigin::manual}) {
    if (to_string(o) == s) return o;
  }
  fail(ErrorKind::validation, "unknown note origin '" + std::string(s) + "'");
}

ProjectNotes::ProjectNotes(std::string project_id, std::filesystem::path dir)
    : project_id_(std::move(project_id)), files_(std::move(dir)) {
  if (!files_.exists()) {
    files_.initialize(json{{"project_id", project_id_}, {"dim", 0}, {"count", 0}});
    return;
  }
  const json meta = files_.meta();
  const auto dim = meta.value("dim", std::size_t{0});
  const auto count = meta.value("count", std::size_t{0});
  const std::string lines = files_.read_committed(kNotes);
  const auto vectors = persistence::unpack_f32_le(files_.read_committed(kVectors));
  if (vectors.size() != dim * count) {
    fail(ErrorKind::integrity, "note vectors in " + files_.dir().string() + " disagree with the manifest");
  }
  index_ = knowledge::FlatIndex(dim);
  std::size_t pos = 0;
  while (pos < lines.size()) {
    const std::size_t nl = lines.find('\n', pos);
    if (nl == std::string::npos) fail(ErrorKind::integrity, "unterminated note in " + files_.dir().string());
    try {
      const json j = json::parse(lines.substr(pos, nl - pos));
      LongTermNote n;
      j.at("note_id").get_to(n.note_id);
      j.at("agent_name").get_to(n.agent_name);
      j.at("project_id").get_to(n.project_id);
      j.at("text").get_to(n.text);
      n.origin = parse_note_origin(j.at("origin").get<std::string>());
      j.at("created_at").get_to(n.created_at);
      notes_.push_back(std::move(n));
    } catch (const std::exception& e) {
      fail(ErrorKind::integrity, "corrupt note in " + files_.dir().string() + ": " + e.what());
    }
    pos = nl + 1;
  }
  if (notes_.size() != count) fail(ErrorKind::integrity, "note count mismatch in " + files_.dir().string());
  for (std::size_t i = 0; i < count; ++i) index_.add(std::span<const float>(vectors.data() + i * dim, dim));
}

void ProjectNotes::append(LongTermNote note) {
  std::lock_guard writer(writer_mu_);
  const std::size_t current = dim();
  if (current != 0 && note.embedding.dim() != current) {
    fail(ErrorKind::config, "note embedding dimension " + std::to_string(note.embedding.dim()) +
                                " does not match project dimension " + std::to_string(current));
  }
  const json record{{"note_id", note.note_id}, {"agent_name", note.agent_name}, {"project_id", note.project_id},
                    {"text", note.text},       {"origin", to_string(note.origin)}, {"created_at", note.created_at}};
  const std::size_t count = size();
  files_.commit({{kNotes, dump_compact(record) + "\n"}, {kVectors, persistence::pack_f32_le(note.embedding.values)}},
                json{{"project_id", project_id_}, {"dim", note.embedding.dim()}, {"count", count + 1}});
  std::unique_lock lock(mu_);
  index_.add(note.embedding.values);
  note.embedding.values.clear();
  notes_.push_back(std::move(note));
}

std::vector<ScoredNote> ProjectNotes::recall(const std::string& agent, std::span<const float> query,
                                             std::size_t k) const {
  std::shared_lock lock(mu_);
  if (notes_.empty() || k == 0) return {};
  const auto scores = index_.scores(query);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < notes_.size(); ++i) {
    if (notes_[i].agent_name == agent) rows.push_back(i);
  }
  const std::size_t take = std::min(k, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
  std::vector<ScoredNote> out;
  for (std::size_t i = 0; i < take; ++i) {
    ScoredNote sn{notes_[rows[i]], scores[rows[i]]};
    const auto v = index_.row(rows[i]);
    sn.note.embedding.values.assign(v.begin(), v.end());
    out.push_back(std::move(sn));
  }
  return out;
}

std::vector<LongTermNote> ProjectNotes::notes_of(const std::string& agent) const {
  std::shared_lock lock(mu_);
  std::vector<LongTermNote> out;
  for (std::size_t i = 0; i < notes_.size(); ++i) {
    if (notes_[i].agent_name != agent) continue;
    out.push_back(notes_[i]);
    const auto v = index_.row(i);
    out.back().embedding.values.assign(v.begin(), v.end());
  }
  return out;
}

std::size_t ProjectNotes::size() const {
  std::shared_lock lock(mu_);
  return notes_.size();
}

std::size_t ProjectNotes::dim() const {
  std::shared_lock lock(mu_);
  return index_.dim();
}

MemoryStore::MemoryStore(persistence::Store& store, llm::Gateway& gateway, Clock& clock, IdGenerator& ids)
    : store_(store), gateway_(gateway), clock_(clock), ids_(ids) {}

void MemoryStore::check_agent(const std::string& agent, const std::string& project_id) const {
  if (!store_.project_exists(project_id)) fail(ErrorKind::not_found, "no project with id '" + project_id + "'");
  if (agent == kCoordinatorName || agent == kCriticName) return;
  const ProjectRecord p = store_.load_project(project_id);
  if (p.find_expert(agent) == nullptr) {
    fail(ErrorKind::not_found, "no agent '" + agent + "' in project " + project_id);
  }
}

ProjectNotes& MemoryStore::notes_for(const std::string& project_id) {
  std::lock_guard lock(mu_);
  auto& slot = open_[project_id];
  if (!slot) slot = std::make_unique<ProjectNotes>(project_id, store_.notes_dir(project_id));
  return *slot;
}

LongTermNote MemoryStore::store_note(const std::string& agent, const std::string& project_id, const std::string& text,
                                     NoteOrigin origin) {
  if (text::trim(text).empty()) fail(ErrorKind::validation, "note text must be non-empty");
  check_agent(agent, project_id);
  store_.acquire_writer(project_id);
  LongTermNote note;
  note.note_id = ids_.next("note");
  note.agent_name = agent;
  note.project_id = project_id;
  note.text = text::sanitize_utf8(text);
  note.origin = origin;
  note.embedding = gateway_.embed({note.text}).front();
  note.created_at = format_timestamp(clock_.now());
  notes_for(project_id).append(note);
  return note;
}

std::vector<ScoredNote> MemoryStore::recall_notes(const std::string& agent, const std::string& project_id,
                                                  const std::string& query, std::size_t k) {
  if (text::trim(query).empty()) fail(ErrorKind::validation, "recall query must be non-empty");
  check_agent(agent, project_id);
  auto& notes = notes_for(project_id);
  if (notes.size() == 0) return {};
  const auto q = gateway_.embed({query});
  return notes.recall(agent, q.front().values, k);
}

std::vector<LongTermNote> MemoryStore::notes_of(const std::string& agent, const std::string& project_id) {
  check_agent(agent, project_id);
  return notes_for(project_id).notes_of(agent);
}

}  // namespace thinktank::memory
