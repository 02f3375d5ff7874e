// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/campaign.hpp"

#include "txbench/scheduler.hpp"
#include "txbench/transport.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace txbench::emu {

namespace {

multiaccess::Round run_one_round(const std::vector<LinkProfile>& profiles,
                                 Protocol protocol,
                                 const message::WarningMessage& msg,
                                 const TransportConfig& cfg, uint64_t r,
                                 const BatchOptions& opt) {
  multiaccess::Round round;
  round.round_index = r;
  round.protocol = protocol;
  round.scheduled_at_s = static_cast<double>(r) * opt.round_spacing_s;
  round.legs.resize(profiles.size());
  for (size_t i = 0; i < profiles.size(); ++i) {
    auto profile = profiles[i];
    profile.rng_seed =
        derive_seed(opt.seed ^ splitmix64(profile.rng_seed), r, i);
    World world(World::Mode::Virtual, round.scheduled_at_s);
    Network network(world, cfg);
    auto& ep = network.attach(profile);
    ActorScope scope(world);
    auto meta = ep.sample_metadata();
    auto rec = transport::transact(
        protocol, ep, msg, cfg,
        r * profiles.size() + static_cast<uint64_t>(i) + 1);
    rec.meta = std::move(meta);
    round.legs[i] = std::move(rec);
  }
  round.start_skew_s = multiaccess::compute_skew(round.legs);
  return round;
}

}  // namespace

std::vector<multiaccess::Round> run_batch_rounds(
    const std::vector<LinkProfile>& profiles, Protocol protocol,
    SizeClass size_class, const TransportConfig& cfg, uint64_t n_rounds,
    const BatchOptions& opt) {
  if (profiles.empty()) {
    throw ValidationError("run_batch_rounds needs at least one profile");
  }
  cfg.validate();
  const auto msg =
      message::build_warning_message(sched::default_event(opt.seed), size_class);

  std::vector<multiaccess::Round> rounds(n_rounds);
#ifdef _OPENMP
  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long long r = 0; r < static_cast<long long>(n_rounds); ++r) {
      rounds[static_cast<size_t>(r)] = run_one_round(
          profiles, protocol, msg, cfg, static_cast<uint64_t>(r), opt);
    }
    return rounds;
  }
#endif
  for (uint64_t r = 0; r < n_rounds; ++r) {
    rounds[r] = run_one_round(profiles, protocol, msg, cfg, r, opt);
  }
  return rounds;
}

}  // namespace txbench::emu
