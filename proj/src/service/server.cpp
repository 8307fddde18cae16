#include "thinktank/service/server.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "thinktank/error.hpp"
#include "thinktank/persistence/codec.hpp"

namespace thinktank::service {

using nlohmann::json;

int ServerOptions::port_from_env() {
  const char* env = std::getenv("THINKTANK_PORT");
  if (env == nullptr || *env == '\0') return 8700;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 65535) fail(ErrorKind::config, std::string("THINKTANK_PORT is not a port: ") + env);
  return static_cast<int>(v);
}

std::string sse_frame(const MeetingEvent& event) {
  std::string out = "id: " + std::to_string(event.seq) + "\n";
  out += "event: ";
  out += to_string(event.phase);
  out += "\ndata: ";
  out += dump_compact(json(event));
  out += "\n\n";
  return out;
}

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict:
    case ErrorKind::state: return 409;
    case ErrorKind::gateway:
    case ErrorKind::protocol: return 502;
    case ErrorKind::timeout: return 504;
    case ErrorKind::config:
    case ErrorKind::integrity: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump_compact(body), "application/json");
}

void send_error(httplib::Response& res, const Error& e, json extra = json::object()) {
  json body{{"error", to_string(e.kind())}, {"message", e.what()}};
  if (!e.details().empty()) body["details"] = e.details();
  for (auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, status_for(e.kind()), body);
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorKind::validation, std::string("malformed request: ") + e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, json{{"error", "internal"}, {"message", e.what()}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body);
  if (!body.is_object()) fail(ErrorKind::validation, "request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorKind::validation, std::string("missing string field '") + field + "'", {field});
  }
  return it->get<std::string>();
}

}  // namespace

struct Server::Impl {
  Impl(Workspace& w, ServerOptions o)
      : ws(w), opt(std::move(o)), hub(std::make_shared<EventHub>(opt.queue_capacity)) {}

  Workspace& ws;
  ServerOptions opt;
  std::shared_ptr<EventHub> hub;
  httplib::Server http;
  std::thread thread;
  int port = -1;
  std::atomic<bool> stopping{false};

  void routes();
  void stream(const std::string& meeting_id, std::uint64_t from_seq, httplib::DataSink& sink, Subscription& sub);
};

void Server::Impl::stream(const std::string& meeting_id, std::uint64_t from_seq, httplib::DataSink& sink,
                          Subscription& sub) {
  std::uint64_t next = from_seq;
  bool finished = false;
  bool alive = true;
  auto write = [&](const std::string& s) {
    if (!sink.write(s.data(), s.size())) alive = false;
    return alive;
  };
  auto emit = [&](const MeetingEvent& e) {
    if (e.seq < next) return;
    if (!write(sse_frame(e))) return;
    next = e.seq + 1;
    if (is_terminal_phase(e.phase)) finished = true;
  };
  auto catch_up = [&] {
    for (const auto& e : ws.events(meeting_id, next)) {
      if (finished || !alive) return;
      emit(e);
    }
  };

  // The subscription was taken before this replay, so nothing falls between the two.
  catch_up();
  auto last_write = std::chrono::steady_clock::now();
  while (!finished && alive && !stopping) {
    std::vector<MeetingEvent> batch;
    switch (sub.take(batch, opt.poll)) {
      case Subscription::Wait::events:
        for (const auto& e : batch) {
          if (finished || !alive) break;
          if (e.seq > next) catch_up();  // defensive: fill any hole from the log
          emit(e);
        }
        last_write = std::chrono::steady_clock::now();
        break;
      case Subscription::Wait::overflow:
        catch_up();
        if (!finished) write("event: resume\ndata: " + dump_compact(json{{"from_seq", next}}) + "\n\n");
        return;
      case Subscription::Wait::closed:
        return;
      case Subscription::Wait::timeout:
        if (!ws.is_running(meeting_id)) {
          catch_up();
          return;
        }
        if (std::chrono::steady_clock::now() - last_write >= opt.heartbeat) {
          write(": keep-alive\n\n");
          last_write = std::chrono::steady_clock::now();
        }
        break;
    }
  }
}

void Server::Impl::routes() {
  http.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
             const auto s = ws.gateway().health_check();
             json body{{"backend", s.name}, {"models", s.models}, {"reachable", s.reachable}};
             if (s.warning) body["warning"] = *s.warning;
             send_json(res, 200, body);
           }));

  http.Post("/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const json body = parse_body(req);
              std::vector<std::string> objectives;
              if (auto it = body.find("objectives"); it != body.end()) objectives = it->get<std::vector<std::string>>();
              const auto p = ws.create_project(required_string(body, "title"), body.value("description", ""),
                                               objectives);
              send_json(res, 201, json(p));
            }));

  http.Get("/projects", guarded([this](const httplib::Request&, httplib::Response& res) {
             send_json(res, 200, json(ws.list_projects()));
           }));

  http.Get("/projects/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, json(ws.project(req.path_params.at("id"))));
           }));

  http.Post("/projects/:id/experts", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const json body = parse_body(req);
              const auto e = ws.add_expert(req.path_params.at("id"), required_string(body, "name"),
                                           body.value("persona", ""));
              send_json(res, 201, json(e));
            }));

  http.Post("/projects/:id/documents", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const json body = parse_body(req);
              const Media media = parse_media(body.value("media", std::string(to_string(Media::plain_text))));
              const auto up = ws.upload_document(req.path_params.at("id"), required_string(body, "expert"),
                                                 required_string(body, "source_name"), media,
                                                 required_string(body, "content"));
              send_json(res, 201, json{{"document", up.document}, {"chunk_count", up.chunk_count}});
            }));

  http.Post("/experts/:id/warmup", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const auto [project_id, expert] = ws.find_expert(req.path_params.at("id"));
              const auto mid = ws.start_warmup(project_id, expert.name, hub->listener());
              send_json(res, 202, json{{"meeting_id", mid}, {"project_id", project_id}});
            }));

  http.Post("/projects/:id/meetings", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const json body = parse_body(req);
              MeetingConfig config;
              config.project_id = req.path_params.at("id");
              config.agenda = body.value("agenda", "");
              config.rounds = body.value("rounds", 1);
              config.participants = body.value("participants", std::vector<std::string>{});
              config.retrieval_k = body.value("retrieval_k", config.retrieval_k);
              config.context_budget = body.value("context_budget", config.context_budget);
              const auto project = ws.project(config.project_id);
              if (const auto violations = validate_meeting_config(config, project); !violations.empty()) {
                send_json(res, 400,
                          json{{"error", "validation"},
                               {"message", "invalid meeting config"},
                               {"violations", violations}});
                return;
              }
              const auto mid = ws.start_meeting(config, hub->listener());
              send_json(res, 202,
                        json{{"meeting_id", mid},
                             {"events", "/meetings/" + mid + "/events"},
                             {"minutes", "/meetings/" + mid + "/minutes"}});
            }));

  http.Get("/meetings/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto mid = req.path_params.at("id");
             const auto m = ws.minutes(mid);
             send_json(res, 200,
                       json{{"meeting_id", mid},
                            {"project_id", m.config.project_id},
                            {"kind", to_string(m.config.kind)},
                            {"status", to_string(m.status)},
                            {"events", m.transcript.size()}});
           }));

  http.Get("/meetings/:id/minutes", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto mid = req.path_params.at("id");
             const auto m = ws.minutes(mid);
             if (m.status == MeetingStatus::running) {
               send_error(res, Error(ErrorKind::state, "meeting in progress: " + mid), json{{"status", "running"}});
               return;
             }
             if (req.get_param_value("format") == "markdown") {
               res.status = 200;
               res.set_content(ws.export_minutes(mid), "text/markdown; charset=utf-8");
               return;
             }
             json body = m;
             body["transcript"] = m.transcript;
             send_json(res, 200, body);
           }));

  http.Get("/meetings/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto mid = req.path_params.at("id");
             if (!ws.store().meeting_project(mid)) fail(ErrorKind::not_found, "no meeting with id '" + mid + "'");
             std::uint64_t from_seq = 1;
             if (req.has_param("from_seq")) {
               const auto v = req.get_param_value("from_seq");
               try {
                 from_seq = std::stoull(v);
               } catch (const std::exception&) {
                 fail(ErrorKind::validation, "from_seq must be a positive integer");
               }
             } else if (req.has_header("Last-Event-ID")) {
               from_seq = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
             }
             if (from_seq == 0) from_seq = 1;
             auto sub = hub->subscribe(mid);
             res.set_header("Cache-Control", "no-cache");
             res.set_chunked_content_provider(
                 "text/event-stream",
                 [this, mid, from_seq, sub](std::size_t, httplib::DataSink& sink) {
                   try {
                     stream(mid, from_seq, sink, *sub);
                   } catch (const std::exception& e) {
                     std::cerr << "thinktank: stream " << mid << ": " << e.what() << "\n";
                   }
                   sink.done();
                   return true;
                 },
                 [this, mid, sub](bool) { hub->unsubscribe(mid, sub); });
           }));
}

Server::Server(Workspace& workspace, ServerOptions options)
    : impl_(std::make_unique<Impl>(workspace, std::move(options))) {
  const std::size_t threads = impl_->opt.worker_threads;
  impl_->http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->port >= 0) return impl_->port;
  auto& opt = impl_->opt;
  if (opt.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(opt.host);
  } else if (impl_->http.bind_to_port(opt.host, opt.port)) {
    impl_->port = opt.port;
  }
  if (impl_->port < 0) fail(ErrorKind::config, "cannot bind " + opt.host + ":" + std::to_string(opt.port));
  return impl_->port;
}

void Server::listen() {
  bind();
  impl_->http.listen_after_bind();
}

void Server::start() {
  bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void Server::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->hub->close_all();
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Server::port() const noexcept { return impl_->port; }

EventHub& Server::hub() noexcept { return *impl_->hub; }

}  // namespace thinktank::service
