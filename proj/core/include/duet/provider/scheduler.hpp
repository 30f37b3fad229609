#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace duet::provider {

using Millis = std::int64_t;

/// Time source plus deferred execution. Mock providers and the session
/// host stamp and schedule everything through this, so tests can swap in
/// a virtual clock and get a fully deterministic interleaving.
class Scheduler {
 public:
  using Task = std::function<void()>;

  virtual ~Scheduler() = default;

  virtual Millis now() const = 0;
  /// Runs `task` at absolute time `when` (or as soon as possible if past).
  /// Tasks due at the same instant run in posting order.
  virtual void post_at(Millis when, Task task) = 0;

  void post_after(Millis delay, Task task) {
    post_at(now() + delay, std::move(task));
  }
};

namespace detail {

struct TimedTask {
  Millis when;
  std::uint64_t order;
  Scheduler::Task task;
};

struct LaterFirst {
  bool operator()(const TimedTask& a, const TimedTask& b) const {
    return a.when != b.when ? a.when > b.when : a.order > b.order;
  }
};

using TaskQueue =
    std::priority_queue<TimedTask, std::vector<TimedTask>, LaterFirst>;

}  // namespace detail

/// Manually driven clock. Nothing runs until run_until_idle()/run_until().
class VirtualScheduler final : public Scheduler {
 public:
  Millis now() const override;
  void post_at(Millis when, Task task) override;

  /// Executes due tasks in (time, posting order) until the queue drains.
  /// Tasks may post further tasks. Returns the number of tasks executed.
  std::size_t run_until_idle();
  /// Executes every task due at or before `deadline`; the clock ends there.
  std::size_t run_until(Millis deadline);

  std::size_t pending() const;

 private:
  bool pop_due(Millis deadline, detail::TimedTask& out);

  mutable std::mutex mu_;
  Millis now_ = 0;
  std::uint64_t next_order_ = 0;
  detail::TaskQueue queue_;
};

/// Wall-clock scheduler backed by one worker thread. now() is Unix epoch
/// milliseconds. Pending tasks are discarded on destruction.
class RealtimeScheduler final : public Scheduler {
 public:
  RealtimeScheduler();
  ~RealtimeScheduler() override;

  RealtimeScheduler(const RealtimeScheduler&) = delete;
  RealtimeScheduler& operator=(const RealtimeScheduler&) = delete;

  Millis now() const override;
  void post_at(Millis when, Task task) override;

 private:
  void loop();

  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::uint64_t next_order_ = 0;
  detail::TaskQueue queue_;
  std::thread worker_;
};

}  // namespace duet::provider
