#include "thinktank/llm/ollama_gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "thinktank/error.hpp"
#include "thinktank/text.hpp"

namespace thinktank::llm {

using nlohmann::json;

namespace {

void configure(httplib::Client& cli, std::chrono::milliseconds connect, std::chrono::milliseconds io) {
  cli.set_connection_timeout(connect);
  cli.set_read_timeout(io);
  cli.set_write_timeout(io);
  cli.set_keep_alive(false);
}

bool transient_status(int status) { return status == 500 || status == 502 || status == 503 || status == 504; }

std::string server_error_text(const std::string& body) {
  try {
    const json j = json::parse(body);
    if (j.contains("error") && j.at("error").is_string()) return j.at("error").get<std::string>();
  } catch (const json::exception&) {
  }
  return body.substr(0, 200);
}

bool model_listed(const std::vector<std::string>& models, const std::string& wanted) {
  for (const auto& m : models) {
    if (m == wanted || m == wanted + ":latest") return true;
  }
  return false;
}

}  // namespace

OllamaOptions OllamaOptions::from_env() {
  OllamaOptions o;
  if (const char* url = std::getenv("THINKTANK_LLM_URL"); url != nullptr && *url != '\0') o.base_url = url;
  return o;
}

OllamaGateway::OllamaGateway(OllamaOptions options, Sleeper sleeper)
    : options_(std::move(options)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

OllamaGateway::HttpReply OllamaGateway::post_with_retry(const std::string& path, const std::string& body,
                                                        std::chrono::milliseconds timeout) {
  const std::size_t attempts = options_.backoff.size() + 1;
  bool timed_out = false;
  std::string last_problem;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) sleeper_(options_.backoff[attempt - 1]);
    httplib::Client cli(options_.base_url);
    configure(cli, options_.connect_timeout, timeout);
    const auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path, body, "application/json");
    if (!res) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const auto err = res.error();
      timed_out = err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= timeout);
      last_problem = httplib::to_string(err);
      continue;
    }
    if (transient_status(res->status)) {
      timed_out = false;
      last_problem = "HTTP " + std::to_string(res->status) + ": " + server_error_text(res->body);
      continue;
    }
    if (res->status == 404) {
      fail(ErrorKind::config, "model server reports not found for " + path + ": " + server_error_text(res->body));
    }
    if (res->status != 200) {
      fail(ErrorKind::protocol,
           "unexpected HTTP " + std::to_string(res->status) + " from " + path + ": " + server_error_text(res->body));
    }
    return HttpReply{res->status, std::move(res->body)};
  }
  const std::string message = "request to " + options_.base_url + path + " failed after " +
                              std::to_string(attempts) + " attempts: " + last_problem;
  fail(timed_out ? ErrorKind::timeout : ErrorKind::gateway, message);
}

std::string OllamaGateway::chat(const ChatRequest& request) {
  validate(request);
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  const json body = {
      {"model", request.model.empty() ? options_.chat_model : request.model},
      {"messages", messages},
      {"stream", false},
      {"options", {{"temperature", request.temperature}}},
  };
  const auto reply =
      post_with_retry("/api/chat", body.dump(-1, ' ', false, json::error_handler_t::replace), request.timeout);

  std::string content;
  try {
    const json j = json::parse(reply.body);
    content = j.at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::protocol, std::string("malformed /api/chat response: ") + e.what());
  }
  content = text::sanitize_utf8(content);
  if (text::trim(content).empty()) fail(ErrorKind::protocol, "model returned an empty completion");
  if (text::char_count(content) > request.max_output_chars) {
    const auto offsets = text::char_offsets(content);
    content.resize(offsets[request.max_output_chars]);
  }
  return content;
}

std::vector<EmbeddingVector> OllamaGateway::embed(const std::vector<std::string>& texts) {
  validate_embed_input(texts);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const json body = {{"model", options_.embedding_model}, {"prompt", t}};
    const auto reply = post_with_retry("/api/embeddings", body.dump(-1, ' ', false, json::error_handler_t::replace),
                                       options_.embed_timeout);
    EmbeddingVector v;
    try {
      const json j = json::parse(reply.body);
      v.values = j.at("embedding").get<std::vector<float>>();
    } catch (const json::exception& e) {
      fail(ErrorKind::protocol, std::string("malformed /api/embeddings response: ") + e.what());
    }
    if (v.values.empty()) fail(ErrorKind::protocol, "server returned an empty embedding");
    for (float x : v.values) {
      if (!std::isfinite(x)) fail(ErrorKind::protocol, "server returned a non-finite embedding value");
    }
    const std::size_t expected = options_.embedding_dim != 0 ? options_.embedding_dim
                                 : out.empty()                ? v.dim()
                                                              : out.front().dim();
    if (v.dim() != expected) {
      fail(ErrorKind::config, "embedding dimension " + std::to_string(v.dim()) + " does not match expected " +
                                  std::to_string(expected));
    }
    out.push_back(std::move(v));
  }
  return out;
}

BackendStatus OllamaGateway::health_check() noexcept {
  BackendStatus status;
  status.name = "ollama@" + options_.base_url;
  try {
    httplib::Client cli(options_.base_url);
    configure(cli, options_.health_timeout, options_.health_timeout);
    auto res = cli.Get("/api/tags");
    if (!res || res->status != 200) return status;
    const json j = json::parse(res->body);
    for (const auto& m : j.at("models")) status.models.push_back(m.at("name").get<std::string>());
    status.reachable = true;
    if (!model_listed(status.models, options_.chat_model)) {
      status.warning = "configured chat model '" + options_.chat_model + "' is not installed on the server";
    }
  } catch (...) {
    status.reachable = false;
  }
  return status;
}

}  // namespace thinktank::llm
