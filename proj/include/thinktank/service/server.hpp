#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include "thinktank/service/event_hub.hpp"
#include "thinktank/workspace.hpp"

namespace thinktank::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8700;
  std::size_t queue_capacity = 1024;
  std::size_t worker_threads = 32;
  /// Comment frame sent on an idle stream.
  std::chrono::milliseconds heartbeat{15000};
  /// How often an idle stream re-checks whether its meeting is still alive.
  std::chrono::milliseconds poll{250};

  /// THINKTANK_PORT, or 8700.
  static int port_from_env();
};

/// Formats one event as a server-sent-events frame: id is the seq, event is the phase.
std::string sse_frame(const MeetingEvent& event);

/// HTTP/JSON front of a Workspace, with an SSE transcript stream per meeting.
class Server {
 public:
  Server(Workspace& workspace, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the bound port. Error(config) if it cannot bind.
  int bind();
  /// Serves until stop(); binds first if needed.
  void listen();
  /// bind() plus listen() on a background thread.
  void start();
  void stop();

  int port() const noexcept;
  EventHub& hub() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace thinktank::service
