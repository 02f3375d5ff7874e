// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/fit.hpp"

#include <algorithm>
#include <cmath>

#include "txbench/analysis.hpp"
#include "txbench/campaign.hpp"

namespace txbench::emu {

namespace {

// Shape constants tuned once against the reference targets; the calibration
// loop only moves the component medians.
constexpr double kFastWeight = 0.91;
constexpr double kFastSigma = 0.70;
constexpr double kSlowSigma = 0.45;
constexpr uint64_t kDatagramExposures = 5;  // four uplink datagrams + reply

struct SimQuantiles {
  double median = 0.0;
  double q90 = 0.0;
  bool ok = false;
};

SimQuantiles simulate(const LinkProfile& profile, uint64_t rounds,
                      uint64_t seed) {
  TransportConfig cfg;
  BatchOptions opt;
  opt.seed = seed;
  opt.round_spacing_s = 1.0;
  const auto sim = run_batch_rounds({profile}, Protocol::UDP, SizeClass::SMALL,
                                    cfg, rounds, opt);
  std::vector<double> durations;
  durations.reserve(sim.size());
  for (const auto& r : sim) {
    for (const auto& leg : r.legs) {
      if (leg.success()) durations.push_back(leg.duration_s);
    }
  }
  SimQuantiles out;
  if (durations.size() < 100) return out;
  std::sort(durations.begin(), durations.end());
  out.median = analysis::quantile_sorted(durations, 0.5);
  out.q90 = analysis::quantile_sorted(durations, 0.9);
  out.ok = true;
  return out;
}

}  // namespace

LinkProfile fit_profile_to_targets(double median_s, double q90_s,
                                   double txn_loss, const FitOptions& opt) {
  if (!(median_s > 0.0 && median_s < q90_s)) {
    throw ValidationError("fit targets require 0 < median < q90");
  }
  if (txn_loss < 0.0 || txn_loss >= 1.0) {
    throw ValidationError("txn_loss out of [0, 1)");
  }

  LinkProfile p;
  p.link_id = "fitted";
  p.rng_seed = derive_seed(opt.seed, 0xF17ull);
  MixtureComponent fast{kFastWeight, median_s * 0.27, kFastSigma};
  MixtureComponent slow{1.0 - kFastWeight, q90_s * 0.7, kSlowSigma};

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    p.mixture.components = {fast, slow};
    p.loss_rate = 0.0;  // calibrate latency with loss off; loss is independent
    const auto sim =
        simulate(p, opt.sim_rounds, derive_seed(opt.seed, 0x5349u, iter));
    if (!sim.ok) throw CalibrationError("simulation produced no successes");

    const double err_m = sim.median / median_s;
    const double err_q = sim.q90 / q90_s;
    if (std::abs(err_m - 1.0) < 0.03 && std::abs(err_q - 1.0) < 0.03) {
      const auto check =
          simulate(p, opt.verify_rounds, derive_seed(opt.seed, 0x564552u, iter));
      if (check.ok && std::abs(check.median / median_s - 1.0) < opt.tolerance &&
          std::abs(check.q90 / q90_s - 1.0) < opt.tolerance) {
        p.loss_rate =
            1.0 - std::pow(1.0 - txn_loss, 1.0 / double(kDatagramExposures));
        p.mixture.validate();
        return p;
      }
    }
    // Damped multiplicative updates; the fast mode owns the median, the slow
    // mode owns the tail quantile.
    fast.median_s /= std::pow(err_m, 0.9);
    slow.median_s /= std::pow(err_q, 0.9);
    fast.median_s = std::clamp(fast.median_s, 1e-5, 10.0);
    slow.median_s = std::clamp(slow.median_s, fast.median_s * 0.5, 30.0);
  }
  throw CalibrationError("profile fit did not converge for targets median=" +
                         std::to_string(median_s) +
                         " q90=" + std::to_string(q90_s));
}

}  // namespace txbench::emu
