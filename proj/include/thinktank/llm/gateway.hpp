#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinktank::llm {

enum class MessageRole { system, user, assistant };
std::string_view to_string(MessageRole r);

struct Message {
  MessageRole role = MessageRole::user;
  std::string content;
};

/// Routing metadata attached by the engine. Never sent over the wire; the
/// scripted backend matches on it.
struct RequestTags {
  std::string kind;     // "team" | "warmup"
  std::string phase;    // guidance | expert_turn | critique | synthesis | final_summary
  std::string speaker;
  int round = 0;
  int attempt = 1;
};

struct ChatRequest {
  std::string model = "llama3.1";
  std::vector<Message> messages;
  double temperature = 0.7;
  std::size_t max_output_chars = 16000;
  std::chrono::milliseconds timeout{120000};
  RequestTags tags;

  /// Concatenation of all message contents, in order; what the tests search for carry-over.
  std::string full_text() const;
};

/// Throws Error(validation) when the request breaks ChatRequest invariants.
void validate(const ChatRequest& request);

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

struct BackendStatus {
  std::string name;
  std::vector<std::string> models;
  bool reachable = false;
  std::optional<std::string> warning;
};

/// Uniform access to the chat/embedding model. Implementations are thread-safe.
class Gateway {
 public:
  virtual ~Gateway() = default;

  /// Returns a non-empty completion.
  virtual std::string chat(const ChatRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
  virtual BackendStatus health_check() noexcept = 0;
};

/// Precondition check shared by every embed() implementation.
void validate_embed_input(const std::vector<std::string>& texts);

}  // namespace thinktank::llm
