#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "thinktank/meeting/engine.hpp"
#include "thinktank/model.hpp"

namespace thinktank::service {

/// One stream consumer's queue. Bounded: a consumer that falls behind is cut
/// off with `overflowed` set and must resume from the log.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  enum class Wait { events, timeout, overflow, closed };

  /// Waits up to `timeout` for queued events and moves them into `out`.
  Wait take(std::vector<MeetingEvent>& out, std::chrono::milliseconds timeout);

  void push(const MeetingEvent& event);
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<MeetingEvent> queue_;
  std::size_t capacity_;
  bool overflowed_ = false;
  bool closed_ = false;
};

class EventHub : public std::enable_shared_from_this<EventHub> {
 public:
  explicit EventHub(std::size_t queue_capacity = 1024) : capacity_(queue_capacity) {}

  std::shared_ptr<Subscription> subscribe(const std::string& meeting_id);
  void unsubscribe(const std::string& meeting_id, const std::shared_ptr<Subscription>& sub);
  void publish(const MeetingEvent& event);
  /// Closes every subscription, e.g. on shutdown.
  void close_all();
  std::size_t subscriber_count(const std::string& meeting_id) const;

  /// Listener handed to the engine; forwards every recorded event here and keeps
  /// the hub alive for as long as the meeting runs. The hub must be owned by a shared_ptr.
  std::shared_ptr<meeting::EventListener> listener();

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::shared_ptr<Subscription>>> subs_;
};

}  // namespace thinktank::service
