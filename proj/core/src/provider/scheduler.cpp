#include "duet/provider/scheduler.hpp"

#include <algorithm>
#include <limits>

namespace duet::provider {

Millis VirtualScheduler::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualScheduler::post_at(Millis when, Task task) {
  std::lock_guard lock(mu_);
  queue_.push({std::max(when, now_), next_order_++, std::move(task)});
}

bool VirtualScheduler::pop_due(Millis deadline, detail::TimedTask& out) {
  std::lock_guard lock(mu_);
  if (queue_.empty() || queue_.top().when > deadline) return false;
  out = std::move(const_cast<detail::TimedTask&>(queue_.top()));
  queue_.pop();
  now_ = std::max(now_, out.when);
  return true;
}

std::size_t VirtualScheduler::run_until_idle() {
  std::size_t ran = 0;
  detail::TimedTask t;
  while (pop_due(std::numeric_limits<Millis>::max(), t)) {
    t.task();
    ++ran;
  }
  return ran;
}

std::size_t VirtualScheduler::run_until(Millis deadline) {
  std::size_t ran = 0;
  detail::TimedTask t;
  while (pop_due(deadline, t)) {
    t.task();
    ++ran;
  }
  std::lock_guard lock(mu_);
  now_ = std::max(now_, deadline);
  return ran;
}

std::size_t VirtualScheduler::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

RealtimeScheduler::RealtimeScheduler() : worker_([this] { loop(); }) {}

RealtimeScheduler::~RealtimeScheduler() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

Millis RealtimeScheduler::now() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch())
      .count();
}

void RealtimeScheduler::post_at(Millis when, Task task) {
  {
    std::lock_guard lock(mu_);
    queue_.push({when, next_order_++, std::move(task)});
  }
  cv_.notify_all();
}

void RealtimeScheduler::loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (queue_.empty()) {
      cv_.wait(lock);
      continue;
    }
    const Millis delay = queue_.top().when - now();
    if (delay > 0) {
      cv_.wait_for(lock, std::chrono::milliseconds(delay));
      continue;
    }
    auto task = std::move(const_cast<detail::TimedTask&>(queue_.top()).task);
    queue_.pop();
    lock.unlock();
    task();
    lock.lock();
  }
}

}  // namespace duet::provider
