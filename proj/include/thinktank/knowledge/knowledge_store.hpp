#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/knowledge/chunker.hpp"
#include "thinktank/knowledge/flat_index.hpp"
#include "thinktank/llm/gateway.hpp"
#include "thinktank/model.hpp"
#include "thinktank/persistence/append_dir.hpp"

namespace thinktank::persistence {
class Store;
}

namespace thinktank::knowledge {

struct ChunkingParams {
  std::size_t chunk_size = 1000;
  std::size_t overlap = 200;
};

struct ChunkRecord {
  std::string chunk_id;
  std::string doc_id;
  std::size_t ordinal = 0;
  std::string text;
  CharSpan char_span;
  llm::EmbeddingVector embedding;
};

struct ScoredChunk {
  ChunkRecord chunk;
  double score = 0.0;
  /// Source name of the owning document, for citations.
  std::string source_name;
};

struct IngestResult {
  DocumentRef document;
  std::size_t chunk_count = 0;
};

/// One knowledge base: documents, chunks and their vectors under one directory.
/// Many concurrent readers; ingests are serialized and swap in atomically.
class KnowledgeBase {
 public:
  /// Loads an existing base, or creates it with `params` when absent.
  KnowledgeBase(std::string id, std::filesystem::path dir, ChunkingParams params);

  const std::string& id() const noexcept { return id_; }
  ChunkingParams params() const noexcept { return params_; }
  std::size_t dim() const;
  std::size_t chunk_count() const;
  std::size_t document_count() const;

  IngestResult ingest(const std::string& source_name, std::string_view raw_text, Media media, llm::Gateway& gateway,
                      Clock& clock, IdGenerator& ids);

  std::vector<ScoredChunk> retrieve(std::string_view query, std::size_t k, llm::Gateway& gateway) const;
  std::vector<ScoredChunk> retrieve_vector(std::span<const float> query, std::size_t k) const;

  /// All chunks in ingestion order (document order, then ordinal).
  std::vector<ChunkRecord> chunks() const;
  std::vector<DocumentRef> documents() const;

 private:
  void load();

  std::string id_;
  persistence::AppendOnlyDir files_;
  ChunkingParams params_;

  std::mutex writer_mu_;
  mutable std::shared_mutex mu_;
  std::vector<DocumentRef> documents_;
  std::map<std::string, std::size_t> doc_index_;
  std::vector<ChunkRecord> chunks_;  // embeddings left empty; vectors live in index_
  FlatIndex index_;
};

/// Keeps chunks scoring at least the mean score of the input; falls back to
/// the single best chunk when none do. Input must be sorted by score, descending.
std::vector<ScoredChunk> adaptive_filter(std::span<const ScoredChunk> results);

/// Registry of the knowledge bases of every project in a store.
class KnowledgeStore {
 public:
  KnowledgeStore(persistence::Store& store, llm::Gateway& gateway, Clock& clock, IdGenerator& ids,
                 ChunkingParams defaults = {});

  std::string create_knowledge_base(const std::string& project_id);
  std::string create_knowledge_base(const std::string& project_id, ChunkingParams params);
  bool exists(const std::string& project_id, const std::string& kb_id) const;
  /// Error(not_found) for an unknown base.
  std::shared_ptr<KnowledgeBase> open(const std::string& project_id, const std::string& kb_id);

  IngestResult ingest_document(const std::string& project_id, const std::string& kb_id,
                               const std::string& source_name, std::string_view raw_text, Media media);
  std::vector<ScoredChunk> retrieve(const std::string& project_id, const std::string& kb_id, std::string_view query,
                                    std::size_t k);

  ChunkingParams defaults() const noexcept { return defaults_; }

 private:
  persistence::Store& store_;
  llm::Gateway& gateway_;
  Clock& clock_;
  IdGenerator& ids_;
  ChunkingParams defaults_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<KnowledgeBase>> open_;
};

}  // namespace thinktank::knowledge
