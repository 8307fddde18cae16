#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "thinktank/llm/gateway.hpp"

namespace thinktank::llm {

/// A request matches when every field that is set equals the request's tag
/// (and `contains` is a substring of the request text).
struct ScriptMatcher {
  std::optional<std::string> kind;
  std::optional<std::string> phase;
  std::optional<std::string> speaker;
  std::optional<int> round;
  std::optional<int> attempt;
  std::optional<std::string> contains;

  bool matches(const ChatRequest& request) const;
};

/// Response text may use {speaker} {phase} {round} {kind} placeholders.
struct ScriptRule {
  ScriptMatcher match;
  std::string response;
};

struct Script {
  std::vector<ScriptRule> rules;
  std::size_t embedding_dim = 64;
  std::chrono::milliseconds latency{0};
  /// Chat calls whose 1-based index is listed here fail with a gateway error.
  std::vector<std::size_t> fail_on_calls;

  static Script from_json_text(const std::string& json_text);
  static Script load(const std::filesystem::path& path);

  /// Catch-all script that answers every phase with templated, well-formed text.
  static Script builtin();
};

/// Deterministic stand-in for the model server. First matching rule wins;
/// an unmatched request is a gateway error. Every chat request is captured.
class ScriptedGateway final : public Gateway {
 public:
  explicit ScriptedGateway(Script script);

  std::string chat(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  BackendStatus health_check() noexcept override;

  std::vector<ChatRequest> captured() const;
  void clear_captured();
  std::size_t embedding_dim() const noexcept { return script_.embedding_dim; }

 private:
  Script script_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> captured_;
  std::size_t chat_calls_ = 0;
};

std::string render_template(const std::string& tmpl, const RequestTags& tags);

}  // namespace thinktank::llm
