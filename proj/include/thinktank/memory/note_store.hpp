#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/knowledge/flat_index.hpp"
#include "thinktank/llm/gateway.hpp"
#include "thinktank/persistence/append_dir.hpp"

namespace thinktank::persistence {
class Store;
}

namespace thinktank::memory {

enum class NoteOrigin { warmup, round_synthesis, manual };
std::string_view to_string(NoteOrigin o);
NoteOrigin parse_note_origin(std::string_view s);

struct LongTermNote {
  std::string note_id;
  std::string agent_name;
  std::string project_id;
  std::string text;
  NoteOrigin origin = NoteOrigin::manual;
  llm::EmbeddingVector embedding;
  std::string created_at;
};

struct ScoredNote {
  LongTermNote note;
  double score = 0.0;
};

/// Append-only long-term notes of every agent in one project
/// (notes/notes.jsonl + notes/vectors.f32 + manifest).
class ProjectNotes {
 public:
  ProjectNotes(std::string project_id, std::filesystem::path dir);

  void append(LongTermNote note);
  /// Top-k of one agent's notes by cosine; ties by note order.
  std::vector<ScoredNote> recall(const std::string& agent, std::span<const float> query, std::size_t k) const;
  std::vector<LongTermNote> notes_of(const std::string& agent) const;
  std::size_t size() const;
  std::size_t dim() const;

 private:
  std::string project_id_;
  persistence::AppendOnlyDir files_;
  std::mutex writer_mu_;
  mutable std::shared_mutex mu_;
  std::vector<LongTermNote> notes_;  // embeddings kept in index_
  knowledge::FlatIndex index_;
};

/// Long-term memory across the projects of a store.
class MemoryStore {
 public:
  MemoryStore(persistence::Store& store, llm::Gateway& gateway, Clock& clock, IdGenerator& ids);

  /// Error(not_found) for an unknown project or an agent that is not part of it.
  LongTermNote store_note(const std::string& agent, const std::string& project_id, const std::string& text,
                          NoteOrigin origin);
  std::vector<ScoredNote> recall_notes(const std::string& agent, const std::string& project_id,
                                       const std::string& query, std::size_t k);
  std::vector<LongTermNote> notes_of(const std::string& agent, const std::string& project_id);

 private:
  ProjectNotes& notes_for(const std::string& project_id);
  void check_agent(const std::string& agent, const std::string& project_id) const;

  persistence::Store& store_;
  llm::Gateway& gateway_;
  Clock& clock_;
  IdGenerator& ids_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<ProjectNotes>> open_;
};

}  // namespace thinktank::memory
