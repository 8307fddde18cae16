#include "thinktank/llm/scripted_gateway.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "thinktank/error.hpp"
#include "thinktank/llm/hash_embedding.hpp"

namespace thinktank::llm {

using nlohmann::json;

bool ScriptMatcher::matches(const ChatRequest& request) const {
  const auto& t = request.tags;
  if (kind && *kind != t.kind) return false;
  if (phase && *phase != t.phase) return false;
  if (speaker && *speaker != t.speaker) return false;
  if (round && *round != t.round) return false;
  if (attempt && *attempt != t.attempt) return false;
  if (contains && request.full_text().find(*contains) == std::string::npos) return false;
  return true;
}

Script Script::from_json_text(const std::string& json_text) {
  Script script;
  try {
    const json doc = json::parse(json_text);
    script.embedding_dim = doc.value("embedding_dim", std::size_t{64});
    script.latency = std::chrono::milliseconds(doc.value("latency_ms", 0));
    if (doc.contains("fail_on_calls")) script.fail_on_calls = doc.at("fail_on_calls").get<std::vector<std::size_t>>();
    for (const auto& r : doc.value("rules", json::array())) {
      ScriptRule rule;
      const json m = r.value("match", json::object());
      if (m.contains("kind")) rule.match.kind = m.at("kind").get<std::string>();
      if (m.contains("phase")) rule.match.phase = m.at("phase").get<std::string>();
      if (m.contains("speaker")) rule.match.speaker = m.at("speaker").get<std::string>();
      if (m.contains("round")) rule.match.round = m.at("round").get<int>();
      if (m.contains("attempt")) rule.match.attempt = m.at("attempt").get<int>();
      if (m.contains("contains")) rule.match.contains = m.at("contains").get<std::string>();
      rule.response = r.at("response").get<std::string>();
      script.rules.push_back(std::move(rule));
    }
    if (doc.value("include_builtin", false)) {
      for (auto& rule : Script::builtin().rules) script.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("malformed script: ") + e.what());
  }
  if (script.embedding_dim == 0) fail(ErrorKind::config, "script embedding_dim must be positive");
  return script;
}

Script Script::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "script file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Script Script::builtin() {
  Script s;
  auto rule = [&](std::optional<std::string> kind, std::optional<std::string> phase, std::string response) {
    ScriptRule r;
    r.match.kind = std::move(kind);
    r.match.phase = std::move(phase);
    r.response = std::move(response);
    s.rules.push_back(std::move(r));
  };
  rule("warmup", std::nullopt,
       "Key concepts noted by {speaker} while reading batch {round}: terminology, constraints and open problems "
       "of the domain.");
  rule(std::nullopt, "guidance",
       "Guidance for round {round}: stay on the agenda, build on the carried-over synthesis, and answer the "
       "open follow-up questions.");
  rule(std::nullopt, "expert_turn",
       "{speaker}, round {round}: my analysis of the agenda from my domain, grounded in the retrieved material "
       "and in the earlier contributions.");
  rule(std::nullopt, "critique",
       "Critique of round {round}: the integration plan rests on unstated assumptions and leaves the "
       "implementation risks unquantified.");
  rule(std::nullopt, "synthesis",
       "SYNTHESIS:\nRound {round} consolidated the expert positions and the critique into a shared plan.\n"
       "FOLLOW-UP QUESTIONS:\n1. Which risks raised in round {round} need deeper investigation?\n"
       "2. What evidence would settle the open assumptions?");
  rule(std::nullopt, "final_summary",
       "Final summary: the team converged on a plan across all rounds and listed the remaining open questions.");
  return s;
}

std::string render_template(const std::string& tmpl, const RequestTags& tags) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string::npos) {
        const std::string key = tmpl.substr(i + 1, close - i - 1);
        if (key == "speaker") { out += tags.speaker; i = close + 1; continue; }
        if (key == "phase") { out += tags.phase; i = close + 1; continue; }
        if (key == "round") { out += std::to_string(tags.round); i = close + 1; continue; }
        if (key == "kind") { out += tags.kind; i = close + 1; continue; }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

ScriptedGateway::ScriptedGateway(Script script) : script_(std::move(script)) {}

std::string ScriptedGateway::chat(const ChatRequest& request) {
  validate(request);
  std::size_t call = 0;
  {
    std::lock_guard lock(mu_);
    captured_.push_back(request);
    call = ++chat_calls_;
  }
  if (script_.latency.count() > 0) std::this_thread::sleep_for(script_.latency);
  if (std::find(script_.fail_on_calls.begin(), script_.fail_on_calls.end(), call) != script_.fail_on_calls.end()) {
    fail(ErrorKind::gateway, "scripted failure on chat call " + std::to_string(call));
  }
  for (const auto& rule : script_.rules) {
    if (rule.match.matches(request)) {
      std::string text = render_template(rule.response, request.tags);
      if (text.size() > request.max_output_chars) text.resize(request.max_output_chars);
      if (text.empty()) fail(ErrorKind::protocol, "scripted rule produced an empty completion");
      return text;
    }
  }
  fail(ErrorKind::gateway, "no scripted response for kind=" + request.tags.kind + " phase=" + request.tags.phase +
                               " speaker=" + request.tags.speaker + " round=" + std::to_string(request.tags.round));
}

std::vector<EmbeddingVector> ScriptedGateway::embed(const std::vector<std::string>& texts) {
  validate_embed_input(texts);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(EmbeddingVector{hash_embedding(t, script_.embedding_dim)});
  return out;
}

BackendStatus ScriptedGateway::health_check() noexcept {
  return BackendStatus{"scripted", {"scripted"}, true, std::nullopt};
}

std::vector<ChatRequest> ScriptedGateway::captured() const {
  std::lock_guard lock(mu_);
  return captured_;
}

void ScriptedGateway::clear_captured() {
  std::lock_guard lock(mu_);
  captured_.clear();
}

}  // namespace thinktank::llm
