#include "thinktank/service/event_hub.hpp"

#include <algorithm>

namespace thinktank::service {

Subscription::Wait Subscription::take(std::vector<MeetingEvent>& out, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || overflowed_ || closed_; });
  // Deliver what was queued before the cut-off so the resume point is as late as possible.
  if (!queue_.empty()) {
    out.insert(out.end(), std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
    queue_.clear();
    return Wait::events;
  }
  if (overflowed_) return Wait::overflow;
  if (closed_) return Wait::closed;
  return Wait::timeout;
}

void Subscription::push(const MeetingEvent& event) {
  {
    std::lock_guard lock(mu_);
    if (overflowed_ || closed_) return;
    if (queue_.size() >= capacity_) {
      overflowed_ = true;
    } else {
      queue_.push_back(event);
    }
  }
  cv_.notify_all();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::shared_ptr<Subscription> EventHub::subscribe(const std::string& meeting_id) {
  auto sub = std::make_shared<Subscription>(capacity_);
  std::lock_guard lock(mu_);
  subs_[meeting_id].push_back(sub);
  return sub;
}

void EventHub::unsubscribe(const std::string& meeting_id, const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  auto it = subs_.find(meeting_id);
  if (it == subs_.end()) return;
  std::erase(it->second, sub);
  if (it->second.empty()) subs_.erase(it);
}

void EventHub::publish(const MeetingEvent& event) {
  std::vector<std::shared_ptr<Subscription>> targets;
  {
    std::lock_guard lock(mu_);
    if (auto it = subs_.find(event.meeting_id); it != subs_.end()) targets = it->second;
  }
  for (const auto& s : targets) s->push(event);
}

void EventHub::close_all() {
  std::map<std::string, std::vector<std::shared_ptr<Subscription>>> all;
  {
    std::lock_guard lock(mu_);
    all.swap(subs_);
  }
  for (auto& [_, list] : all) {
    for (auto& s : list) s->close();
  }
}

std::size_t EventHub::subscriber_count(const std::string& meeting_id) const {
  std::lock_guard lock(mu_);
  auto it = subs_.find(meeting_id);
  return it == subs_.end() ? 0 : it->second.size();
}

namespace {
class HubListener final : public meeting::EventListener {
 public:
  explicit HubListener(std::shared_ptr<EventHub> hub) : hub_(std::move(hub)) {}
  void on_event(const MeetingEvent& event) override { hub_->publish(event); }

 private:
  std::shared_ptr<EventHub> hub_;
};
}  // namespace

std::shared_ptr<meeting::EventListener> EventHub::listener() { return std::make_shared<HubListener>(shared_from_this()); }

}  // namespace thinktank::service
