#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/llm/scripted_gateway.hpp"
#include "thinktank/workspace.hpp"

namespace tt_test {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tt") {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

/// Scripted backend, stepping clock and seeded ids over a temp data dir.
struct Rig {
  explicit Rig(thinktank::llm::Script script = thinktank::llm::Script::builtin(),
               thinktank::WorkspaceOptions options = {}, const fs::path& dir = {})
      : gateway(std::move(script)),
        ids(clock, 42),
        workspace(dir.empty() ? tmp.path() : dir, gateway, clock, ids, options) {}

  TempDir tmp;
  thinktank::llm::ScriptedGateway gateway;
  thinktank::SteppingClock clock;
  thinktank::IdGenerator ids;
  thinktank::Workspace workspace;

  /// Project with experts named E1..En, each with a one-document knowledge base.
  thinktank::ProjectRecord project_with_experts(std::size_t n, bool with_docs = true) {
    auto p = workspace.create_project("Test Project", "A project for tests", {"decide"});
    for (std::size_t i = 1; i <= n; ++i) {
      const std::string name = "E" + std::to_string(i);
      workspace.add_expert(p.id, name, "You are expert " + name + ".");
      if (with_docs) {
        workspace.upload_document(p.id, name, name + ".txt", thinktank::Media::plain_text,
                                  "Notes of " + name + " about topic" + std::to_string(i) +
                                      " and shared rendering pipelines.");
      }
    }
    return workspace.project(p.id);
  }
};

inline std::vector<std::string> expert_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("E" + std::to_string(i));
  return out;
}

/// Plain double-precision cosine, written out independently of the index code.
inline double cosine_oracle(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::string random_words(std::mt19937_64& rng, std::size_t words) {
  static const char* vocab[] = {"skin",  "light",  "render", "shader", "mesh",   "rig",   "face",  "pore",
                                "gpu",   "scatter", "model", "motion", "camera", "hair",  "eye",   "lens",
                                "frame", "budget",  "risk",  "plan",   "asset",  "bake",  "probe", "volume"};
  std::uniform_int_distribution<std::size_t> pick(0, std::size(vocab) - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

}  // namespace tt_test
