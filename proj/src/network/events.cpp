#include "donorchain/network/events.hpp"

#include <spdlog/spdlog.h>

namespace donorchain::network {

bool EventFilter::matches(const CommitEvent& e) const {
  if (tx_id && *tx_id != e.tx_id) return false;
  if (event_name && (!e.event || e.event->name != *event_name)) return false;
  return true;
}

EventBus::EventBus() : thread_([this] { run(); }) {}

EventBus::~EventBus() { stop(); }

std::uint64_t EventBus::subscribe(EventFilter filter, Handler handler) {
  std::lock_guard lock(mu_);
  auto id = next_id_++;
  subscribers_.emplace(id, std::make_pair(std::move(filter), std::move(handler)));
  return id;
}

void EventBus::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(mu_);
  subscribers_.erase(id);
}

void EventBus::publish(std::vector<CommitEvent> events) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    for (auto& e : events) queue_.push_back(std::move(e));
  }
  cv_.notify_one();
}

void EventBus::flush() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return (queue_.empty() && !busy_) || stopping_; });
}

void EventBus::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  cv_.notify_all();
  idle_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void EventBus::run() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [&] { return !queue_.empty() || stopping_; });
    if (stopping_ && queue_.empty()) return;
    auto event = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    std::vector<Handler> targets;
    for (const auto& [id, sub] : subscribers_) {
      if (sub.first.matches(event)) targets.push_back(sub.second);
    }
    lock.unlock();
    for (const auto& handler : targets) {
      try {
        handler(event);
      } catch (const std::exception& e) {
        spdlog::warn("event handler for {} threw: {}", event.tx_id, e.what());
      }
    }
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

}  // namespace donorchain::network
