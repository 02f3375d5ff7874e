// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "txbench/net.hpp"
#include "txbench/types.hpp"
#include "txbench/world.hpp"

namespace txbench::emu {

/// Deterministic random stream with fixed draw accounting: every delay sample
/// consumes exactly three uniforms, every loss check one. Keeps event
/// outcomes identical across runs regardless of what happens to be dropped.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_bits() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double u01() { return u01_from_bits(next_bits()); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    double u1 = u01();
    const double u2 = u01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  uint64_t state_;
};

/// One mode of the one-way delay distribution. Log-normal keeps support
/// positive with a heavy-ish tail; `median_s` is exp(mu).
struct MixtureComponent {
  double weight = 1.0;
  double median_s = 0.05;
  double sigma_log = 0.3;
};

struct LatencyMixture {
  std::vector<MixtureComponent> components;
  void validate() const;
  /// Index of the fastest (lowest-median) component; the synthetic metadata
  /// source reports it as LTE, everything else as 3G.
  size_t fastest_component() const;
};

/// Draws a one-way delay: component by weight, then log-normal within it.
double sample_one_way_delay(const LatencyMixture& mix, Rng& rng);
/// Same, also reporting which component was drawn.
double sample_one_way_delay(const LatencyMixture& mix, Rng& rng,
                            size_t* component_out);

struct OutageWindow {
  double start_s = 0.0;
  double duration_s = 0.0;
};

/// Emulated behavior of one operator link.
struct LinkProfile {
  std::string link_id;
  LatencyMixture mixture;
  double loss_rate = 0.0;  // per-datagram, each direction independently
  std::vector<OutageWindow> outages;             // non-overlapping
  std::optional<double> bandwidth_bytes_per_s;   // serialization cap
  uint64_t rng_seed = 0;
  /// 1-based ordinals of uplink data packets to drop deterministically
  /// (testing aid for exact-loss scenarios).
  std::vector<uint64_t> scripted_drops;

  void validate() const;
  bool in_outage(double at_s) const;

  std::string to_json_string(int indent = 2) const;
  static LinkProfile from_json_string(const std::string& text);
  static LinkProfile load(const std::string& path);
  void save(const std::string& path) const;
};

struct TransmitOutcome {
  bool delivered = false;
  double deliver_at_s = 0.0;
  size_t component = 0;  // mixture component the delay was drawn from
};

/// Applies loss, outage, delay and serialization to one packet handed to the
/// link at `at`. `data_ordinal` is the 1-based count of uplink data packets
/// (0 for control traffic); scripted drops match against it.
TransmitOutcome transmit(const LinkProfile& profile, Rng& rng,
                         uint64_t data_ordinal, size_t bytes, double at_s);

/// The emulated link layer: a set of links and a model server on one World.
/// The model server implements the upload contract (reply with the byte
/// count once the expected size arrived; premature reply after the stall
/// timeout) without real sockets.
class Network {
 public:
  Network(World& world, TransportConfig cfg);
  ~Network();

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  World& world() { return world_; }

  /// Attaches a link; the returned endpoint stays owned by the Network.
  net::LinkEndpoint& attach(const LinkProfile& profile);

  /// Administrative link state; a downed link reports LINK_DOWN immediately.
  void set_link_up(const std::string& link_id, bool up);

  std::vector<ServerTxnLog> server_log() const;
  size_t malformed_count() const;

  /// When enabled, records one line per link-layer event (deterministic in
  /// virtual mode; used by the determinism tests).
  void enable_trace(bool on);
  std::vector<std::string> trace() const;

  // Opaque internals; defined in the implementation file.
  struct Link;
  struct Impl;

 private:
  World& world_;
  std::unique_ptr<Impl> impl_;
};

/// Runs round legs as world actors so that all legs observe the same virtual
/// start instant regardless of OS scheduling. The calling thread must itself
/// be registered as an actor.
class EmuLegRunner : public net::LegRunner {
 public:
  explicit EmuLegRunner(World& world) : world_(world) {}
  double now() const override { return world_.now(); }
  uint64_t wall_ms() const override { return world_.wall_ms(); }
  void sleep_until(double t_s) override { world_.sleep_until(t_s); }
  void run_concurrently(std::vector<std::function<void()>> legs) override;

 private:
  World& world_;
};

/// RAII actor registration.
struct ActorScope {
  explicit ActorScope(World& w) : world(w) { world.actor_enter(); }
  ~ActorScope() { world.actor_leave(); }
  ActorScope(const ActorScope&) = delete;
  ActorScope& operator=(const ActorScope&) = delete;
  World& world;
};

}  // namespace txbench::emu
