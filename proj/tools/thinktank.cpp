// thinktank: command-line front end. Talks to a running service over HTTP, or
// runs everything in-process against a data directory (--embedded).

#include <httplib.h>
#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "thinktank/clock.hpp"
#include "thinktank/error.hpp"
#include "thinktank/llm/hash_embedding.hpp"
#include "thinktank/llm/ollama_gateway.hpp"
#include "thinktank/llm/scripted_gateway.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/fs_util.hpp"
#include "thinktank/service/server.hpp"
#include "thinktank/text.hpp"
#include "thinktank/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thinktank;

namespace {

struct GlobalOptions {
  std::string service_url;
  bool embedded = false;
  std::string data_dir;
  std::string llm_url;
  std::string backend = "ollama";
  std::string script;
  std::string model;
  std::string embed_model;
  std::size_t chunk_size = 1000;
  std::size_t overlap = 200;
  std::string output = "human";
  bool deterministic = false;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::conflict:
    case ErrorKind::state: return 2;
    case ErrorKind::not_found: return 3;
    case ErrorKind::gateway:
    case ErrorKind::timeout:
    case ErrorKind::config:
    case ErrorKind::protocol: return 4;
    case ErrorKind::integrity: return 5;
  }
  return 1;
}

ErrorKind kind_from_name(const std::string& name) {
  for (ErrorKind k : {ErrorKind::validation, ErrorKind::not_found, ErrorKind::conflict, ErrorKind::state,
                      ErrorKind::gateway, ErrorKind::timeout, ErrorKind::config, ErrorKind::protocol,
                      ErrorKind::integrity}) {
    if (to_string(k) == name) return k;
  }
  return ErrorKind::protocol;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Prints events as they arrive when --follow is set.
class EventPrinter final : public meeting::EventListener {
 public:
  EventPrinter(bool json_lines) : json_(json_lines) {}
  void on_event(const MeetingEvent& e) override {
    if (json_) {
      std::cout << dump_compact(json(e)) << std::endl;
    } else {
      std::cout << "[" << e.seq << "] round " << e.round << " " << to_string(e.phase) << " (" << e.speaker
                << ")\n"
                << e.content << "\n"
                << std::endl;
    }
  }

 private:
  bool json_;
};

struct MeetingRequest {
  std::string project_id;
  std::string agenda;
  int rounds = 1;
  std::vector<std::string> experts;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual json create_project(const std::string& title, const std::string& description,
                              const std::vector<std::string>& objectives) = 0;
  virtual json list_projects() = 0;
  virtual json show_project(const std::string& id) = 0;
  virtual json add_expert(const std::string& project_id, const std::string& name, const std::string& persona) = 0;
  virtual json ingest(const std::string& project_id, const std::string& expert, const std::string& source_name,
                      const std::string& media, const std::string& content) = 0;
  /// Both block until the meeting ends and return its minutes as JSON.
  virtual json warmup(const std::string& project_id, const std::string& expert, EventPrinter* follow) = 0;
  virtual json run_meeting(const MeetingRequest& req, EventPrinter* follow) = 0;
  virtual json minutes(const std::string& meeting_id) = 0;
  virtual std::string minutes_markdown(const std::string& meeting_id) = 0;
};

std::unique_ptr<llm::Gateway> make_gateway(const GlobalOptions& g) {
  if (g.backend == "scripted") {
    auto script = g.script.empty() ? llm::Script::builtin() : llm::Script::load(g.script);
    return std::make_unique<llm::ScriptedGateway>(std::move(script));
  }
  if (g.backend != "ollama") fail(ErrorKind::config, "unknown backend '" + g.backend + "'");
  auto opts = llm::OllamaOptions::from_env();
  if (!g.llm_url.empty()) opts.base_url = g.llm_url;
  if (!g.model.empty()) opts.chat_model = g.model;
  if (!g.embed_model.empty()) opts.embedding_model = g.embed_model;
  return std::make_unique<llm::OllamaGateway>(std::move(opts));
}

fs::path data_root(const GlobalOptions& g) {
  return g.data_dir.empty() ? persistence::Store::default_root() : fs::path(g.data_dir);
}

/// Deterministic runs still need distinct ids across separate invocations, so
/// the id seed folds in everything the store already holds.
std::uint64_t store_seed(const fs::path& root) {
  std::vector<std::string> parts;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root / "index" / "meetings", ec)) {
    parts.push_back(entry.path().filename().string());
  }
  for (const auto& entry : fs::directory_iterator(root / "projects", ec)) {
    const fs::path record = entry.path() / "project.json";
    if (fs::exists(record)) parts.push_back(persistence::read_file(record));
  }
  std::sort(parts.begin(), parts.end());
  std::string joined;
  for (const auto& p : parts) joined += p + "\n";
  return llm::fnv1a64(joined);
}

struct Runtime {
  std::unique_ptr<llm::Gateway> gateway;
  std::unique_ptr<Clock> clock;
  std::unique_ptr<IdGenerator> ids;
  std::unique_ptr<Workspace> workspace;

  explicit Runtime(const GlobalOptions& g) {
    const fs::path root = data_root(g);
    gateway = make_gateway(g);
    if (g.deterministic) {
      clock = std::make_unique<SteppingClock>();
      ids = std::make_unique<IdGenerator>(*clock, store_seed(root));
    } else {
      clock = std::make_unique<SystemClock>();
      ids = std::make_unique<IdGenerator>(*clock);
    }
    WorkspaceOptions opts;
    opts.chunking = {g.chunk_size, g.overlap};
    if (!g.model.empty()) opts.engine.prompts.model = g.model;
    workspace = std::make_unique<Workspace>(root, *gateway, *clock, *ids, opts);
  }
};

class EmbeddedBackend final : public Backend {
 public:
  explicit EmbeddedBackend(const GlobalOptions& g) : rt_(g) {}

  json create_project(const std::string& title, const std::string& description,
                      const std::vector<std::string>& objectives) override {
    return ws().create_project(title, description, objectives);
  }
  json list_projects() override { return ws().list_projects(); }
  json show_project(const std::string& id) override { return ws().project(id); }
  json add_expert(const std::string& project_id, const std::string& name, const std::string& persona) override {
    return ws().add_expert(project_id, name, persona);
  }
  json ingest(const std::string& project_id, const std::string& expert, const std::string& source_name,
              const std::string& media, const std::string& content) override {
    const auto up = ws().upload_document(project_id, expert, source_name, parse_media(media), content);
    return json{{"document", up.document}, {"chunk_count", up.chunk_count}};
  }
  json warmup(const std::string& project_id, const std::string& expert, EventPrinter* follow) override {
    const auto report = ws().run_warmup(project_id, expert, follow);
    return minutes(report.meeting_id);
  }
  json run_meeting(const MeetingRequest& req, EventPrinter* follow) override {
    MeetingConfig config;
    config.project_id = req.project_id;
    config.agenda = req.agenda;
    config.rounds = req.rounds;
    config.participants = req.experts;
    const auto m = ws().run_meeting(config, follow);
    return minutes(m.meeting_id);
  }
  json minutes(const std::string& meeting_id) override {
    const auto m = ws().minutes(meeting_id);
    if (m.status == MeetingStatus::running) fail(ErrorKind::state, "meeting in progress: " + meeting_id);
    return m;
  }
  std::string minutes_markdown(const std::string& meeting_id) override { return ws().export_minutes(meeting_id); }

 private:
  Workspace& ws() { return *rt_.workspace; }
  Runtime rt_;
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(const std::string& url) : url_(url), client_(url) {
    client_.set_connection_timeout(std::chrono::seconds(5));
    client_.set_read_timeout(std::chrono::seconds(600));
  }

  json create_project(const std::string& title, const std::string& description,
                      const std::vector<std::string>& objectives) override {
    return post("/projects", {{"title", title}, {"description", description}, {"objectives", objectives}});
  }
  json list_projects() override { return get("/projects"); }
  json show_project(const std::string& id) override { return get("/projects/" + id); }
  json add_expert(const std::string& project_id, const std::string& name, const std::string& persona) override {
    return post("/projects/" + project_id + "/experts", {{"name", name}, {"persona", persona}});
  }
  json ingest(const std::string& project_id, const std::string& expert, const std::string& source_name,
              const std::string& media, const std::string& content) override {
    return post("/projects/" + project_id + "/documents",
                {{"expert", expert}, {"source_name", source_name}, {"media", media}, {"content", content}});
  }
  json warmup(const std::string& project_id, const std::string& expert, EventPrinter* follow) override {
    const json project = show_project(project_id);
    for (const auto& e : project.at("experts")) {
      if (e.at("name") == expert) {
        const json started = post("/experts/" + e.at("id").get<std::string>() + "/warmup", json::object());
        return finish(started.at("meeting_id").get<std::string>(), follow);
      }
    }
    fail(ErrorKind::not_found, "no expert '" + expert + "' in project " + project_id);
  }
  json run_meeting(const MeetingRequest& req, EventPrinter* follow) override {
    const json started = post("/projects/" + req.project_id + "/meetings",
                              {{"agenda", req.agenda}, {"rounds", req.rounds}, {"participants", req.experts}});
    return finish(started.at("meeting_id").get<std::string>(), follow);
  }
  json minutes(const std::string& meeting_id) override { return get("/meetings/" + meeting_id + "/minutes"); }
  std::string minutes_markdown(const std::string& meeting_id) override {
    auto res = client_.Get("/meetings/" + meeting_id + "/minutes?format=markdown");
    return checked(res)->body;
  }

 private:
  const httplib::Result& checked(const httplib::Result& res) {
    if (!res) fail(ErrorKind::gateway, "cannot reach thinktank service at " + url_ + ": " + httplib::to_string(res.error()));
    if (res->status >= 400) {
      const json body = json::parse(res->body, nullptr, false);
      if (body.is_object() && body.contains("error")) {
        std::vector<std::string> details;
        if (body.contains("violations")) {
          for (const auto& v : body["violations"]) {
            details.push_back(v.value("field", "") + ": " + v.value("message", ""));
          }
        }
        std::string message = body.value("message", res->body);
        if (!details.empty()) message += " (" + details.front() + ")";
        throw Error(kind_from_name(body.value("error", "")), message, details);
      }
      fail(ErrorKind::protocol, "service returned HTTP " + std::to_string(res->status));
    }
    return res;
  }
  json get(const std::string& path) { return json::parse(checked(client_.Get(path))->body); }
  json post(const std::string& path, const json& body) {
    return json::parse(checked(client_.Post(path, body.dump(), "application/json"))->body);
  }

  /// Follows the event stream to the terminal event, reconnecting from the
  /// last seen seq when the service asks us to resume.
  json finish(const std::string& meeting_id, EventPrinter* follow) {
    std::uint64_t next = 1;
    bool done = false;
    for (int attempts = 0; !done && attempts < 100; ++attempts) {
      std::string buffer;
      auto res = client_.Get("/meetings/" + meeting_id + "/events?from_seq=" + std::to_string(next),
                             [&](const char* data, std::size_t len) {
                               buffer.append(data, len);
                               std::size_t pos;
                               while ((pos = buffer.find("\n\n")) != std::string::npos) {
                                 const std::string frame = buffer.substr(0, pos);
                                 buffer.erase(0, pos + 2);
                                 std::string event, payload;
                                 std::istringstream lines(frame);
                                 for (std::string line; std::getline(lines, line);) {
                                   if (line.rfind("event: ", 0) == 0) event = line.substr(7);
                                   if (line.rfind("data: ", 0) == 0) payload = line.substr(6);
                                 }
                                 if (event.empty() || event == "resume") continue;
                                 const MeetingEvent e = json::parse(payload).get<MeetingEvent>();
                                 if (e.seq < next) continue;
                                 next = e.seq + 1;
                                 if (follow) follow->on_event(e);
                                 if (is_terminal_phase(e.phase)) done = true;
                               }
                               return true;
                             });
      checked(res);
      if (!done) {
        // Stream ended without a terminal event: the meeting is no longer live.
        const json status = get("/meetings/" + meeting_id);
        if (status.at("status") != "running") break;
      }
    }
    const json status = get("/meetings/" + meeting_id);
    if (status.at("status") == "running") fail(ErrorKind::state, "meeting in progress: " + meeting_id);
    json m = minutes(meeting_id);
    if (m.value("status", "") == "failed") {
      fail(ErrorKind::gateway, "meeting " + meeting_id + " failed: " + m.value("failure_reason", ""));
    }
    return m;
  }

  std::string url_;
  httplib::Client client_;
};

void print_result(const GlobalOptions& g, const json& result, const std::string& human) {
  if (g.output == "json") {
    std::cout << result.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

std::string describe_project(const json& p) {
  std::ostringstream out;
  out << p.at("id").get<std::string>() << "  " << p.at("title").get<std::string>() << "\n";
  if (!p.value("description", "").empty()) out << "  " << p.at("description").get<std::string>() << "\n";
  for (const auto& o : p.value("objectives", json::array())) out << "  objective: " << o.get<std::string>() << "\n";
  for (const auto& e : p.value("experts", json::array())) {
    out << "  expert: " << e.at("name").get<std::string>() << " (" << e.at("id").get<std::string>() << ")"
        << (e.value("warmup_done", false) ? " warmed-up" : "") << "\n";
  }
  out << "  documents: " << p.value("corpus", json::array()).size()
      << "  meetings: " << p.value("meetings", json::array()).size() << "\n";
  return out.str();
}

std::string describe_minutes(const json& m) {
  std::ostringstream out;
  out << "meeting " << m.at("meeting_id").get<std::string>() << " " << m.at("status").get<std::string>();
  const auto rounds = m.value("per_round", json::array()).size();
  out << " (" << rounds << (rounds == 1 ? " round" : " rounds") << ")\n";
  return out.str();
}

int serve(const GlobalOptions& g, const std::string& host, std::optional<int> port) {
  // Block termination signals before any thread starts so only the waiter sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Runtime rt(g);
  service::ServerOptions opts;
  opts.host = host;
  opts.port = port ? *port : service::ServerOptions::port_from_env();
  service::Server server(*rt.workspace, opts);
  const int bound = server.bind();

  const auto health = rt.gateway->health_check();
  std::cerr << "thinktank: serving http://" << host << ":" << bound << " data=" << data_root(g).string()
            << " backend=" << health.name << (health.reachable ? "" : " (unreachable)") << "\n";
  if (health.warning) std::cerr << "thinktank: warning: " << *health.warning << "\n";

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  rt.workspace->wait_idle();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinktank: local multi-agent meeting engine"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  const char* env_service = std::getenv("THINKTANK_SERVICE");
  if (env_service != nullptr) g.service_url = env_service;
  app.add_option("--service", g.service_url, "Service URL (default http://127.0.0.1:8700)");
  app.add_flag("--embedded", g.embedded, "Run in-process against --data-dir instead of a service");
  app.add_option("--data-dir", g.data_dir, "Data directory (THINKTANK_DATA_DIR, default ./thinktank-data)");
  app.add_option("--llm-url", g.llm_url, "Model server URL (THINKTANK_LLM_URL)");
  app.add_option("--backend", g.backend, "Model backend")->check(CLI::IsMember({"ollama", "scripted"}));
  app.add_option("--script", g.script, "Script file for the scripted backend")->check(CLI::ExistingFile);
  app.add_option("--model", g.model, "Chat model name");
  app.add_option("--embed-model", g.embed_model, "Embedding model name");
  app.add_option("--chunk-size", g.chunk_size, "Chunk size in characters")->check(CLI::PositiveNumber);
  app.add_option("--overlap", g.overlap, "Chunk overlap in characters");
  app.add_option("--output", g.output, "Output format")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("--deterministic", g.deterministic, "Fixed clock and seeded ids (embedded mode)");

  auto* project = app.add_subcommand("project", "Manage projects")->require_subcommand(1);
  std::string title, description, project_id;
  std::vector<std::string> objectives;
  auto* p_create = project->add_subcommand("create", "Create a project");
  p_create->add_option("--title", title)->required();
  p_create->add_option("--description", description);
  p_create->add_option("--objective", objectives, "Repeatable");
  auto* p_list = project->add_subcommand("list", "List projects");
  auto* p_show = project->add_subcommand("show", "Show a project");
  p_show->add_option("--project", project_id)->required();

  auto* expert = app.add_subcommand("expert", "Manage experts")->require_subcommand(1);
  std::string expert_name, persona_file;
  auto* e_add = expert->add_subcommand("add", "Add a domain expert");
  e_add->add_option("--project", project_id)->required();
  e_add->add_option("--name", expert_name)->required();
  e_add->add_option("--persona-file", persona_file)->required()->check(CLI::ExistingFile);

  auto* doc = app.add_subcommand("doc", "Manage documents")->require_subcommand(1);
  std::string file, media, source_name;
  auto* d_ingest = doc->add_subcommand("ingest", "Add a document to an expert's knowledge base");
  d_ingest->add_option("--project", project_id)->required();
  d_ingest->add_option("--expert", expert_name)->required();
  d_ingest->add_option("--file", file)->required()->check(CLI::ExistingFile);
  d_ingest->add_option("--media", media)->check(CLI::IsMember({"plain_text", "markdown", "pdf_extracted"}));
  d_ingest->add_option("--source-name", source_name);

  auto* warm = app.add_subcommand("warmup", "Run a warm-up meeting for one expert");
  bool follow = false;
  warm->add_option("--project", project_id)->required();
  warm->add_option("--expert", expert_name)->required();
  warm->add_flag("--follow", follow, "Print events as they happen");

  auto* meeting = app.add_subcommand("meeting", "Run meetings")->require_subcommand(1);
  MeetingRequest mreq;
  std::string agenda_file;
  auto* m_run = meeting->add_subcommand("run", "Run a team meeting");
  m_run->add_option("--project", mreq.project_id)->required();
  m_run->add_option("--agenda-file", agenda_file)->required()->check(CLI::ExistingFile);
  m_run->add_option("--rounds", mreq.rounds)->required();
  m_run->add_option("--experts", mreq.experts, "Comma-separated expert names")->required()->delimiter(',');
  m_run->add_flag("--follow", follow, "Print events as they happen");

  auto* minutes_cmd = app.add_subcommand("minutes", "Read minutes")->require_subcommand(1);
  std::string meeting_id, out_file;
  auto* mi_show = minutes_cmd->add_subcommand("show", "Render a meeting's minutes");
  mi_show->add_option("--meeting", meeting_id)->required();
  mi_show->add_option("--out", out_file, "Write the document to a file");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1";
  std::optional<int> port;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "Port (THINKTANK_PORT, default 8700)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (serve_cmd->parsed()) return serve(g, host, port);

    std::unique_ptr<Backend> backend;
    if (g.embedded) {
      backend = std::make_unique<EmbeddedBackend>(g);
    } else {
      backend = std::make_unique<HttpBackend>(g.service_url.empty() ? "http://127.0.0.1:8700" : g.service_url);
    }
    const bool as_json = g.output == "json";

    if (p_create->parsed()) {
      const json p = backend->create_project(title, description, objectives);
      print_result(g, p, p.at("id").get<std::string>() + "\n");
    } else if (p_list->parsed()) {
      const json list = backend->list_projects();
      std::string human;
      for (const auto& p : list) human += p.at("id").get<std::string>() + "  " + p.at("title").get<std::string>() + "\n";
      print_result(g, list, human);
    } else if (p_show->parsed()) {
      const json p = backend->show_project(project_id);
      print_result(g, p, describe_project(p));
    } else if (e_add->parsed()) {
      const json e = backend->add_expert(project_id, expert_name, std::string(text::trim(read_text_file(persona_file))));
      print_result(g, e, e.at("id").get<std::string>() + "\n");
    } else if (d_ingest->parsed()) {
      if (media.empty()) {
        const auto ext = fs::path(file).extension().string();
        media = (ext == ".md" || ext == ".markdown") ? "markdown" : "plain_text";
      }
      if (source_name.empty()) source_name = fs::path(file).filename().string();
      const json r = backend->ingest(project_id, expert_name, source_name, media, read_text_file(file));
      print_result(g, r,
                   r.at("document").at("doc_id").get<std::string>() + " (" +
                       std::to_string(r.at("chunk_count").get<std::size_t>()) + " chunks)\n");
    } else if (warm->parsed()) {
      EventPrinter printer(as_json);
      const json m = backend->warmup(project_id, expert_name, follow ? &printer : nullptr);
      if (!follow || !as_json) print_result(g, m, describe_minutes(m));
    } else if (m_run->parsed()) {
      mreq.agenda = std::string(text::trim(read_text_file(agenda_file)));
      EventPrinter printer(as_json);
      const json m = backend->run_meeting(mreq, follow ? &printer : nullptr);
      if (!follow || !as_json) print_result(g, m, describe_minutes(m));
    } else if (mi_show->parsed()) {
      if (as_json) {
        const json m = backend->minutes(meeting_id);
        if (!out_file.empty()) {
          persistence::atomic_write_file(out_file, m.dump(2) + "\n");
        } else {
          std::cout << m.dump(2) << "\n";
        }
      } else {
        const std::string doc_text = backend->minutes_markdown(meeting_id);
        if (!out_file.empty()) {
          persistence::atomic_write_file(out_file, doc_text);
        } else {
          std::cout << doc_text;
        }
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "thinktank: " << to_string(e.kind()) << ": " << e.what() << "\n";
    for (std::size_t i = 1; i < e.details().size(); ++i) std::cerr << "  " << e.details()[i] << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "thinktank: " << e.what() << "\n";
    return 1;
  }
}
