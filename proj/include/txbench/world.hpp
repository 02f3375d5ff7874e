// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "txbench/common.hpp"

namespace txbench::emu {

/// Emulation failed to make progress: every actor is blocked forever and no
/// event is pending. Almost always a test or protocol bug.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Event-driven clock domain for the emulated link layer.
///
/// Virtual mode advances time instantly from event to event, so hour-long
/// campaigns finish in seconds. RealTime mode plays the same event stream
/// against the wall clock. Threads that block on emulated I/O register as
/// actors; virtual time only advances when every registered actor is parked
/// with an unsatisfied predicate, which keeps results independent of OS
/// scheduling.
class World {
 public:
  enum class Mode { Virtual, RealTime };

  // Synthetic wall-clock epoch used in virtual mode (fixed so that identical
  // runs produce identical logs).
  static constexpr uint64_t kVirtualWallBaseMs = 1700000000000ull;

  explicit World(Mode mode, double start_time_s = 0.0,
                 uint64_t wall_base_ms = kVirtualWallBaseMs);
  ~World();

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Mode mode() const { return mode_; }
  double now() const;
  uint64_t wall_ms() const;

  /// Register / deregister the calling thread as a blocking participant.
  void actor_enter();
  void actor_leave();

  /// Blocks until pred() holds or world time reaches `deadline`.
  /// The predicate is evaluated under the world lock (and, in virtual mode,
  /// re-evaluated by the coordinator after every advance, so it may carry
  /// idempotent side effects). Returns pred().
  bool wait_until(double deadline_s, const std::function<bool()>& pred);

  /// Same, but in realtime mode the wait parks on `cv` so that event
  /// callbacks can wake exactly the interested thread instead of everyone.
  /// Whoever changes the awaited state must notify `cv` under the world
  /// lock. Virtual mode ignores `cv`.
  bool wait_until_on(std::condition_variable_any* cv, double deadline_s,
                     const std::function<bool()>& pred);

  void sleep_until(double t_s);
  void sleep_for(double dt_s) { sleep_until(now() + dt_s); }

  /// Schedules fn at time `at`. `tie_key` orders simultaneous events
  /// deterministically; callers must keep it unique per event source.
  /// Callable from event callbacks (the lock is reentrant).
  void schedule(double at_s, uint64_t tie_key, std::function<void()> fn);

  /// Re-evaluates every parked actor's predicate. Needed when a predicate
  /// depends on state changed outside of event callbacks.
  void poke();

  /// Runs fn under the world lock. Reentrant: event callbacks and wait
  /// predicates already hold the lock and may call this again.
  template <class F>
  decltype(auto) run_locked(F&& f) const {
    std::lock_guard lk(mu_);
    return std::forward<F>(f)();
  }

 private:
  struct Event {
    double at;
    uint64_t tie_key;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const {
      if (at != o.at) return at > o.at;
      if (tie_key != o.tie_key) return tie_key > o.tie_key;
      return seq > o.seq;
    }
  };

  struct WaitNode {
    const std::function<bool()>* pred = nullptr;
    double deadline = 0.0;
    bool ready = false;   // outcome decided; the actor counts as runnable
    bool failed = false;  // deadlock: the wait must throw
  };

  double now_locked() const;
  bool advance_step_locked();  // returns false when nothing can advance
  void review_waiters_locked();
  void mark_ready_locked(WaitNode& node);
  void coordinator_loop();
  bool run_due_events_locked();
  void delivery_loop();  // realtime mode
  void ensure_coordinator_locked();

  const Mode mode_;
  const uint64_t wall_base_ms_;
  const double start_time_s_;
  const std::chrono::steady_clock::time_point t0_;

  mutable std::recursive_mutex mu_;
  std::condition_variable_any cv_;        // parked actors
  std::condition_variable_any cv_coord_;  // coordinator / delivery thread

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::list<WaitNode*> waiters_;
  double vnow_;
  uint64_t seq_ = 0;
  int actors_ = 0;
  int runnable_ = 0;
  bool stopping_ = false;
  bool coord_active_ = false;
  std::thread helper_;  // coordinator (virtual) or delivery (realtime)
};

}  // namespace txbench::emu
