#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "thinktank/llm/gateway.hpp"

namespace thinktank::llm {

struct OllamaOptions {
  std::string base_url = "http://localhost:11434";
  std::string chat_model = "llama3.1";
  std::string embedding_model = "nomic-embed-text";
  std::chrono::milliseconds connect_timeout{3000};
  std::chrono::milliseconds embed_timeout{60000};
  std::chrono::milliseconds health_timeout{2000};
  /// Waits before each retry of a transient failure; its size is the retry count.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(250), std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(4000)};
  /// Expected embedding width; 0 accepts whatever the server returns first.
  std::size_t embedding_dim = 0;

  /// base_url from THINKTANK_LLM_URL when set.
  static OllamaOptions from_env();
};

/// Client for an Ollama-compatible server: POST /api/chat, POST /api/embeddings, GET /api/tags.
class OllamaGateway final : public Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit OllamaGateway(OllamaOptions options, Sleeper sleeper = {});

  std::string chat(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  BackendStatus health_check() noexcept override;

  const OllamaOptions& options() const noexcept { return options_; }

 private:
  struct HttpReply {
    int status = 0;
    std::string body;
  };
  HttpReply post_with_retry(const std::string& path, const std::string& body, std::chrono::milliseconds timeout);

  OllamaOptions options_;
  Sleeper sleeper_;
};

}  // namespace thinktank::llm
