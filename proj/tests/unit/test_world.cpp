// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include <doctest.h>

#include <atomic>
#include <thread>
#include <vector>

#include "txbench/emulator.hpp"
#include "txbench/world.hpp"

using namespace txbench;
using emu::World;

TEST_CASE("virtual sleep advances instantly to the target time") {
  World w(World::Mode::Virtual);
  emu::ActorScope scope(w);
  const auto wall0 = std::chrono::steady_clock::now();
  w.sleep_until(3600.0);
  const double wall_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();
  CHECK(w.now() == doctest::Approx(3600.0));
  CHECK(wall_elapsed < 1.0);
}

TEST_CASE("events run in (time, key) order regardless of schedule order") {
  World w(World::Mode::Virtual);
  std::vector<int> order;
  w.schedule(2.0, 10, [&] { order.push_back(3); });
  w.schedule(1.0, 20, [&] { order.push_back(2); });
  w.schedule(1.0, 5, [&] { order.push_back(1); });
  emu::ActorScope scope(w);
  w.sleep_until(5.0);
  REQUIRE(order.size() == 3);
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("wait_until returns when the predicate is satisfied by an event") {
  World w(World::Mode::Virtual);
  bool flag = false;
  w.schedule(0.5, 1, [&] { flag = true; });
  emu::ActorScope scope(w);
  const bool got = w.wait_until(2.0, [&] { return flag; });
  CHECK(got);
  CHECK(w.now() == doctest::Approx(0.5));
}

TEST_CASE("wait_until times out at the deadline") {
  World w(World::Mode::Virtual);
  emu::ActorScope scope(w);
  const bool got = w.wait_until(1.25, [] { return false; });
  CHECK(!got);
  CHECK(w.now() == doctest::Approx(1.25));
}

TEST_CASE("deadlock without events or finite deadlines is detected") {
  World w(World::Mode::Virtual);
  emu::ActorScope scope(w);
  CHECK_THROWS_AS(w.wait_until(std::numeric_limits<double>::infinity(),
                               [] { return false; }),
                  emu::DeadlockError);
}

TEST_CASE("multiple actors observe one shared virtual clock") {
  World w(World::Mode::Virtual);
  emu::ActorScope outer(w);

  std::atomic<int> done{0};
  std::vector<double> wake_times(3, 0.0);
  std::vector<std::thread> threads;
  for (int i = 0; i < 3; ++i) {
    threads.emplace_back([&, i] {
      emu::ActorScope scope(w);
      w.sleep_until(1.0 + i);
      wake_times[i] = w.now();
      done.fetch_add(1);
      w.poke();
    });
  }
  w.wait_until(std::numeric_limits<double>::infinity(),
               [&] { return done.load() == 3; });
  for (auto& t : threads) t.join();
  CHECK(wake_times[0] == doctest::Approx(1.0));
  CHECK(wake_times[1] == doctest::Approx(2.0));
  CHECK(wake_times[2] == doctest::Approx(3.0));
  CHECK(w.now() == doctest::Approx(3.0));
}

TEST_CASE("realtime mode delivers an event near its wall-clock time") {
  World w(World::Mode::RealTime);
  std::atomic<bool> flag{false};
  w.schedule(0.05, 1, [&] { flag.store(true); });
  emu::ActorScope scope(w);
  const auto t0 = std::chrono::steady_clock::now();
  const bool got = w.wait_until(1.0, [&] { return flag.load(); });
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  CHECK(got);
  CHECK(dt >= 0.03);
  CHECK(dt < 0.5);
}

TEST_CASE("virtual wall clock is the fixed base plus virtual time") {
  World w(World::Mode::Virtual);
  emu::ActorScope scope(w);
  const auto base = w.wall_ms();
  CHECK(base == World::kVirtualWallBaseMs);
  w.sleep_until(12.5);
  CHECK(w.wall_ms() == World::kVirtualWallBaseMs + 12500);
}
