// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/world.hpp"

#include <cmath>
#include <limits>

namespace txbench::emu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::chrono::steady_clock::time_point to_tp(
    std::chrono::steady_clock::time_point t0, double offset_s, double t_s) {
  const double rel = t_s - offset_s;
  return t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(rel));
}
}  // namespace

World::World(Mode mode, double start_time_s, uint64_t wall_base_ms)
    : mode_(mode),
      wall_base_ms_(wall_base_ms),
      start_time_s_(start_time_s),
      t0_(std::chrono::steady_clock::now()),
      vnow_(start_time_s) {
  if (mode_ == Mode::RealTime) {
    helper_ = std::thread([this] { delivery_loop(); });
  }
}

World::~World() {
  {
    std::lock_guard lk(mu_);
    stopping_ = true;
  }
  cv_coord_.notify_all();
  cv_.notify_all();
  if (helper_.joinable()) helper_.join();
}

double World::now_locked() const {
  if (mode_ == Mode::Virtual) return vnow_;
  const auto dt = std::chrono::steady_clock::now() - t0_;
  return start_time_s_ + std::chrono::duration<double>(dt).count();
}

double World::now() const {
  std::lock_guard lk(mu_);
  return now_locked();
}

uint64_t World::wall_ms() const {
  std::lock_guard lk(mu_);
  return wall_base_ms_ +
         static_cast<uint64_t>(std::llround(now_locked() * 1000.0));
}

void World::actor_enter() {
  std::lock_guard lk(mu_);
  ++actors_;
  ++runnable_;
  if (mode_ == Mode::Virtual && actors_ >= 2) ensure_coordinator_locked();
}

void World::actor_leave() {
  {
    std::lock_guard lk(mu_);
    --actors_;
    --runnable_;
    if (mode_ == Mode::Virtual) review_waiters_locked();
  }
  cv_.notify_all();
  cv_coord_.notify_all();
}

void World::ensure_coordinator_locked() {
  if (coord_active_) return;
  coord_active_ = true;
  helper_ = std::thread([this] { coordinator_loop(); });
}

void World::schedule(double at_s, uint64_t tie_key, std::function<void()> fn) {
  {
    std::lock_guard lk(mu_);
    queue_.push(Event{at_s, tie_key, seq_++, std::move(fn)});
  }
  if (mode_ == Mode::RealTime) cv_coord_.notify_all();
}

void World::poke() {
  {
    std::lock_guard lk(mu_);
    if (mode_ == Mode::Virtual) review_waiters_locked();
  }
  cv_.notify_all();
  cv_coord_.notify_all();
}

void World::mark_ready_locked(WaitNode& node) {
  if (node.ready) return;
  node.ready = true;
  ++runnable_;  // the actor counts as running from this moment
}

/// Decides the outcome of every parked wait whose predicate holds or whose
/// deadline has been reached. Runs under the lock.
void World::review_waiters_locked() {
  for (auto* node : waiters_) {
    if (node->ready) continue;
    if ((*node->pred)() || vnow_ >= node->deadline) {
      mark_ready_locked(*node);
    }
  }
}

bool World::advance_step_locked() {
  const double t_event = queue_.empty() ? kInf : queue_.top().at;
  double t_deadline = kInf;
  for (const auto* node : waiters_) {
    if (!node->ready) t_deadline = std::min(t_deadline, node->deadline);
  }
  const double t = std::min(t_event, t_deadline);
  if (!std::isfinite(t)) return false;
  if (t > vnow_) vnow_ = t;
  while (!queue_.empty() && queue_.top().at <= vnow_) {
    auto fn = std::move(const_cast<Event&>(queue_.top()).fn);
    queue_.pop();
    fn();  // may schedule further events; the mutex is recursive
  }
  review_waiters_locked();
  return true;
}

void World::coordinator_loop() {
  std::unique_lock lk(mu_);
  for (;;) {
    cv_coord_.wait(lk, [&] {
      return stopping_ ||
             (actors_ > 0 && runnable_ == 0 && !waiters_.empty());
    });
    if (stopping_) return;
    if (!advance_step_locked()) {
      // Nothing can move: fail every parked wait.
      for (auto* node : waiters_) {
        if (!node->ready) {
          node->failed = true;
          mark_ready_locked(*node);
        }
      }
    }
    cv_.notify_all();
  }
}

bool World::run_due_events_locked() {
  bool ran = false;
  while (!queue_.empty() && queue_.top().at <= now_locked()) {
    auto fn = std::move(const_cast<Event&>(queue_.top()).fn);
    queue_.pop();
    fn();
    ran = true;
  }
  return ran;
}

void World::delivery_loop() {
  // Sole event executor in realtime mode. Event callbacks wake interested
  // channel waiters through their own condition variables; the global
  // notify below only serves generic wait_until() users.
  std::unique_lock lk(mu_);
  for (;;) {
    if (stopping_) return;
    if (queue_.empty()) {
      cv_coord_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
      continue;
    }
    const double due = queue_.top().at;
    if (now_locked() < due) {
      cv_coord_.wait_until(lk, to_tp(t0_, start_time_s_, due));
      continue;  // re-check: an earlier event may have arrived
    }
    run_due_events_locked();
    cv_.notify_all();
  }
}

bool World::wait_until(double deadline_s, const std::function<bool()>& pred) {
  return wait_until_on(nullptr, deadline_s, pred);
}

bool World::wait_until_on(std::condition_variable_any* cv, double deadline_s,
                          const std::function<bool()>& pred) {
  std::unique_lock lk(mu_);

  if (mode_ == Mode::RealTime) {
    auto& wait_cv = cv ? *cv : cv_;
    for (;;) {
      if (pred()) return true;
      if (now_locked() >= deadline_s) return pred();
      if (std::isfinite(deadline_s)) {
        wait_cv.wait_until(lk, to_tp(t0_, start_time_s_, deadline_s));
      } else {
        wait_cv.wait(lk);
      }
    }
  }

  // Virtual mode.
  if (pred()) return true;
  if (vnow_ >= deadline_s) return pred();

  WaitNode node;
  node.pred = &pred;
  node.deadline = deadline_s;
  const auto it = waiters_.insert(waiters_.end(), &node);
  --runnable_;

  if (!coord_active_) {
    // Sole-actor fast path: advance inline until the wait is decided.
    while (!node.ready) {
      if (!advance_step_locked()) {
        node.failed = true;
        mark_ready_locked(node);
      }
    }
  } else {
    if (runnable_ == 0) cv_coord_.notify_all();
    cv_.wait(lk, [&] { return node.ready; });
  }
  waiters_.erase(it);
  if (node.failed) {
    throw DeadlockError("emulation cannot advance: all actors blocked");
  }
  return pred();
}

void World::sleep_until(double t_s) {
  wait_until(t_s, [] { return false; });
}

}  // namespace txbench::emu
