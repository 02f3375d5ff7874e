// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <functional>
#include <vector>

#include "txbench/emulator.hpp"
#include "txbench/message.hpp"
#include "txbench/multiaccess.hpp"
#include "txbench/net.hpp"
#include "txbench/persistence.hpp"
#include "txbench/types.hpp"

namespace txbench::sched {

/// Deterministically skews a fraction of rounds so the analysis-side
/// synchronization filter has something to reject.
struct SkewInjection {
  double fraction = 0.0;  // exact share of rounds per protocol, seeded choice
  double skew_s = 0.05;   // delay applied to the last leg's start
};

/// Campaign cadence: rounds of `round_length_s`, one protocol round per
/// offset. Defaults match the measurement design this reproduces: one hour,
/// 30 s rounds, UDP/TCP/SECURE at +10/+20/+30 s.
struct ExperimentConfig {
  double run_duration_s = 3600.0;
  double round_length_s = 30.0;
  double offset_udp_s = 10.0;
  double offset_tcp_s = 20.0;
  double offset_secure_s = 30.0;
  SizeClass size_class = SizeClass::SMALL;
  TransportConfig transport;
  uint64_t seed = 1;
  SkewInjection skew_injection;

  void validate() const;
  uint64_t round_count() const {
    return static_cast<uint64_t>(run_duration_s / round_length_s + 0.5);
  }
  double protocol_offset(Protocol p) const;
};

/// The deterministic event every generated message carries.
message::WarningEvent default_event(uint64_t seed);

/// Snapshot from whatever metadata source the endpoint is wired to.
LinkMetadata collect_metadata(net::LinkEndpoint& ep);

/// Exact-count seeded choice of skewed rounds: floor(fraction * rounds) of
/// them, per protocol index.
std::vector<bool> skew_schedule(uint64_t seed, int proto_index,
                                uint64_t rounds, double fraction);

using RoundSink = std::function<void(const multiaccess::Round&)>;

/// Runs the full campaign cadence over the given links, streaming every
/// completed protocol round to `sink`. Unusable links are dropped with a
/// warning; zero usable links aborts.
void run_experiment(const ExperimentConfig& cfg, net::LegRunner& runner,
                    std::vector<net::LinkEndpoint*> links,
                    const RoundSink& sink);

/// Emulated-campaign description as loaded from a config file.
struct EmuRunConfig {
  ExperimentConfig experiment;
  std::vector<emu::LinkProfile> links;
  bool realtime = false;

  static EmuRunConfig from_json_string(const std::string& text);
  static EmuRunConfig load(const std::string& path);
  std::string to_json_string(int indent = 2) const;
};

/// Builds the emulated world and runs the campaign, appending one log record
/// per leg. Returns the number of records written.
size_t run_emulated_experiment(const EmuRunConfig& cfg,
                               persistence::LogWriter& writer);

}  // namespace txbench::sched
