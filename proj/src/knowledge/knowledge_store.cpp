#include "thinktank/knowledge/knowledge_store.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "thinktank/error.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/fs_util.hpp"
#include "thinktank/persistence/store.hpp"
#include "thinktank/text.hpp"

namespace thinktank::knowledge {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDocuments = "documents.jsonl";
constexpr const char* kChunks = "chunks.jsonl";
constexpr const char* kVectors = "vectors.f32";

std::vector<json> parse_lines(const std::string& bytes, const fs::path& where) {
  std::vector<json> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) fail(ErrorKind::integrity, "unterminated record in " + where.string());
    try {
      out.push_back(json::parse(bytes.substr(pos, nl - pos)));
    } catch (const json::exception& e) {
      fail(ErrorKind::integrity, "corrupt record in " + where.string() + ": " + e.what());
    }
    pos = nl + 1;
  }
  return out;
}

json chunk_to_json(const ChunkRecord& c) {
  return json{{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id}, {"ordinal", c.ordinal},
              {"text", c.text},         {"start", c.char_span.start}, {"end", c.char_span.end}};
}

ChunkRecord chunk_from_json(const json& j) {
  ChunkRecord c;
  j.at("chunk_id").get_to(c.chunk_id);
  j.at("doc_id").get_to(c.doc_id);
  j.at("ordinal").get_to(c.ordinal);
  j.at("text").get_to(c.text);
  j.at("start").get_to(c.char_span.start);
  j.at("end").get_to(c.char_span.end);
  return c;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::string id, fs::path dir, ChunkingParams params)
    : id_(std::move(id)), files_(std::move(dir)), params_(params) {
  if (!files_.exists()) {
    if (params_.chunk_size <= params_.overlap) {
      fail(ErrorKind::validation, "chunk_size must exceed overlap");
    }
    files_.initialize(json{{"kb_id", id_},
                           {"dim", 0},
                           {"chunk_size", params_.chunk_size},
                           {"overlap", params_.overlap},
                           {"documents", 0},
                           {"chunks", 0}});
  }
  load();
}

void KnowledgeBase::load() {
  const json meta = files_.meta();
  try {
    params_.chunk_size = meta.at("chunk_size").get<std::size_t>();
    params_.overlap = meta.at("overlap").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::integrity, "corrupt knowledge base manifest in " + files_.dir().string() + ": " + e.what());
  }
  const auto dim = meta.value("dim", std::size_t{0});
  const auto n_docs = meta.value("documents", std::size_t{0});
  const auto n_chunks = meta.value("chunks", std::size_t{0});

  const auto doc_lines = parse_lines(files_.read_committed(kDocuments), files_.dir() / kDocuments);
  const auto chunk_lines = parse_lines(files_.read_committed(kChunks), files_.dir() / kChunks);
  const auto vectors = persistence::unpack_f32_le(files_.read_committed(kVectors));
  if (doc_lines.size() != n_docs || chunk_lines.size() != n_chunks || vectors.size() != n_chunks * dim) {
    fail(ErrorKind::integrity, "knowledge base " + files_.dir().string() + " disagrees with its manifest counts");
  }

  FlatIndex index(dim);
  std::vector<DocumentRef> docs;
  std::vector<ChunkRecord> chunks;
  try {
    for (const auto& j : doc_lines) docs.push_back(j.get<DocumentRef>());
    for (const auto& j : chunk_lines) chunks.push_back(chunk_from_json(j));
  } catch (const std::exception& e) {
    fail(ErrorKind::integrity, "corrupt knowledge base " + files_.dir().string() + ": " + e.what());
  }
  for (std::size_t i = 0; i < n_chunks; ++i) {
    index.add(std::span<const float>(vectors.data() + i * dim, dim));
  }

  std::unique_lock lock(mu_);
  documents_ = std::move(docs);
  doc_index_.clear();
  for (std::size_t i = 0; i < documents_.size(); ++i) doc_index_[documents_[i].doc_id] = i;
  chunks_ = std::move(chunks);
  index_ = std::move(index);
}

std::size_t KnowledgeBase::dim() const {
  std::shared_lock lock(mu_);
  return index_.dim();
}

std::size_t KnowledgeBase::chunk_count() const {
  std::shared_lock lock(mu_);
  return chunks_.size();
}

std::size_t KnowledgeBase::document_count() const {
  std::shared_lock lock(mu_);
  return documents_.size();
}

IngestResult KnowledgeBase::ingest(const std::string& source_name, std::string_view raw_text, Media media,
                                   llm::Gateway& gateway, Clock& clock, IdGenerator& ids) {
  if (text::trim(source_name).empty()) fail(ErrorKind::validation, "source_name must be non-empty");
  const std::string normalized = normalize_whitespace(raw_text);
  if (normalized.empty()) fail(ErrorKind::validation, "document text is empty after whitespace normalization");

  const auto pieces = chunk_text(normalized, params_.chunk_size, params_.overlap);
  std::vector<std::string> texts;
  texts.reserve(pieces.size());
  for (const auto& p : pieces) texts.push_back(p.text);
  const auto embeddings = gateway.embed(texts);
  if (embeddings.size() != pieces.size()) {
    fail(ErrorKind::protocol, "embedding backend returned " + std::to_string(embeddings.size()) + " vectors for " +
                                  std::to_string(pieces.size()) + " chunks");
  }

  std::lock_guard writer(writer_mu_);
  const std::size_t current_dim = dim();
  const std::size_t want_dim = current_dim != 0 ? current_dim : embeddings.front().dim();
  for (const auto& e : embeddings) {
    if (e.dim() != want_dim || want_dim == 0) {
      fail(ErrorKind::config, "embedding dimension " + std::to_string(e.dim()) + " does not match knowledge base " +
                                  id_ + " dimension " + std::to_string(want_dim));
    }
    for (float v : e.values) {
      if (!std::isfinite(v)) fail(ErrorKind::protocol, "embedding contains a non-finite value");
    }
  }

  DocumentRef doc;
  doc.doc_id = ids.next("doc");
  doc.knowledge_base_id = id_;
  doc.source_name = text::sanitize_utf8(text::trim(source_name));
  doc.media = media;
  doc.char_count = text::char_count(normalized);
  doc.ingested_at = format_timestamp(clock.now());

  std::vector<ChunkRecord> records;
  records.reserve(pieces.size());
  std::string chunk_bytes;
  std::string vector_bytes;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    ChunkRecord c;
    c.chunk_id = doc.doc_id + "-c" + std::to_string(i);
    c.doc_id = doc.doc_id;
    c.ordinal = i;
    c.text = pieces[i].text;
    c.char_span = pieces[i].span;
    chunk_bytes += dump_compact(chunk_to_json(c)) + "\n";
    vector_bytes += persistence::pack_f32_le(embeddings[i].values);
    records.push_back(std::move(c));
  }

  std::size_t n_docs = 0;
  std::size_t n_chunks = 0;
  {
    std::shared_lock lock(mu_);
    n_docs = documents_.size();
    n_chunks = chunks_.size();
  }
  const json meta{{"kb_id", id_},
                  {"dim", want_dim},
                  {"chunk_size", params_.chunk_size},
                  {"overlap", params_.overlap},
                  {"documents", n_docs + 1},
                  {"chunks", n_chunks + records.size()}};
  files_.commit({{kDocuments, dump_compact(json(doc)) + "\n"}, {kChunks, chunk_bytes}, {kVectors, vector_bytes}},
                meta);

  std::unique_lock lock(mu_);
  doc_index_[doc.doc_id] = documents_.size();
  documents_.push_back(doc);
  for (std::size_t i = 0; i < records.size(); ++i) {
    index_.add(embeddings[i].values);
    chunks_.push_back(std::move(records[i]));
  }
  return IngestResult{doc, pieces.size()};
}

std::vector<ScoredChunk> KnowledgeBase::retrieve(std::string_view query, std::size_t k, llm::Gateway& gateway) const {
  if (text::trim(query).empty()) fail(ErrorKind::validation, "retrieval query must be non-empty");
  if (k == 0) fail(ErrorKind::validation, "k must be at least 1");
  if (chunk_count() == 0) return {};
  const auto q = gateway.embed({std::string(query)});
  return retrieve_vector(q.front().values, k);
}

std::vector<ScoredChunk> KnowledgeBase::retrieve_vector(std::span<const float> query, std::size_t k) const {
  if (k == 0) fail(ErrorKind::validation, "k must be at least 1");
  std::shared_lock lock(mu_);
  if (chunks_.empty()) return {};
  const auto tie_less = [this](std::size_t a, std::size_t b) {
    const auto& ca = chunks_[a];
    const auto& cb = chunks_[b];
    if (ca.doc_id != cb.doc_id) return ca.doc_id < cb.doc_id;
    return ca.ordinal < cb.ordinal;
  };
  const auto rows = index_.top_k(query, k, tie_less);
  std::vector<ScoredChunk> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    ScoredChunk sc;
    sc.chunk = chunks_[r.row];
    const auto v = index_.row(r.row);
    sc.chunk.embedding.values.assign(v.begin(), v.end());
    sc.score = r.score;
    if (auto it = doc_index_.find(sc.chunk.doc_id); it != doc_index_.end()) {
      sc.source_name = documents_[it->second].source_name;
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<ChunkRecord> KnowledgeBase::chunks() const {
  std::shared_lock lock(mu_);
  std::vector<ChunkRecord> out = chunks_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto v = index_.row(i);
    out[i].embedding.values.assign(v.begin(), v.end());
  }
  return out;
}

std::vector<DocumentRef> KnowledgeBase::documents() const {
  std::shared_lock lock(mu_);
  return documents_;
}

std::vector<ScoredChunk> adaptive_filter(std::span<const ScoredChunk> results) {
  if (results.empty()) return {};
  double sum = 0.0;
  double lo = results.front().score;
  double hi = results.front().score;
  for (const auto& r : results) {
    sum += r.score;
    lo = std::min(lo, r.score);
    hi = std::max(hi, r.score);
  }
  // The exact mean lies in [lo, hi]; clamping removes rounding drift (e.g. all-equal inputs).
  const double threshold = std::clamp(sum / static_cast<double>(results.size()), lo, hi);
  std::vector<ScoredChunk> kept;
  for (const auto& r : results) {
    if (r.score >= threshold) kept.push_back(r);
  }
  if (kept.empty()) kept.push_back(results.front());
  return kept;
}

KnowledgeStore::KnowledgeStore(persistence::Store& store, llm::Gateway& gateway, Clock& clock, IdGenerator& ids,
                               ChunkingParams defaults)
    : store_(store), gateway_(gateway), clock_(clock), ids_(ids), defaults_(defaults) {}

std::string KnowledgeStore::create_knowledge_base(const std::string& project_id) {
  return create_knowledge_base(project_id, defaults_);
}

std::string KnowledgeStore::create_knowledge_base(const std::string& project_id, ChunkingParams params) {
  if (!store_.project_exists(project_id)) fail(ErrorKind::not_found, "no project with id '" + project_id + "'");
  store_.acquire_writer(project_id);
  const std::string id = ids_.next("kb");
  auto kb = std::make_shared<KnowledgeBase>(id, store_.kb_dir(project_id, id), params);
  std::lock_guard lock(mu_);
  open_[project_id + "/" + id] = std::move(kb);
  return id;
}

bool KnowledgeStore::exists(const std::string& project_id, const std::string& kb_id) const {
  try {
    return fs::exists(store_.kb_dir(project_id, kb_id) / "manifest.json");
  } catch (const Error&) {
    return false;
  }
}

std::shared_ptr<KnowledgeBase> KnowledgeStore::open(const std::string& project_id, const std::string& kb_id) {
  const std::string key = project_id + "/" + kb_id;
  std::lock_guard lock(mu_);
  if (auto it = open_.find(key); it != open_.end()) return it->second;
  if (!exists(project_id, kb_id)) fail(ErrorKind::not_found, "no knowledge base with id '" + kb_id + "'");
  auto kb = std::make_shared<KnowledgeBase>(kb_id, store_.kb_dir(project_id, kb_id), defaults_);
  open_[key] = kb;
  return kb;
}

IngestResult KnowledgeStore::ingest_document(const std::string& project_id, const std::string& kb_id,
                                             const std::string& source_name, std::string_view raw_text, Media media) {
  auto kb = open(project_id, kb_id);
  store_.acquire_writer(project_id);
  return kb->ingest(source_name, raw_text, media, gateway_, clock_, ids_);
}

std::vector<ScoredChunk> KnowledgeStore::retrieve(const std::string& project_id, const std::string& kb_id,
                                                  std::string_view query, std::size_t k) {
  return open(project_id, kb_id)->retrieve(query, k, gateway_);
}

}  // namespace thinktank::knowledge
