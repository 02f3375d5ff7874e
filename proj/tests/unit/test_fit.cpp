// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "txbench/analysis.hpp"
#include "txbench/campaign.hpp"
#include "txbench/fit.hpp"

using namespace txbench;
using namespace txbench::emu;

namespace {

struct Quantiles {
  double median = 0.0;
  double q90 = 0.0;
};

Quantiles simulate_udp(const LinkProfile& p, uint64_t rounds, uint64_t seed) {
  BatchOptions opt;
  opt.seed = seed;
  opt.round_spacing_s = 1.0;
  const auto sim = run_batch_rounds({p}, Protocol::UDP, SizeClass::SMALL,
                                    TransportConfig{}, rounds, opt);
  std::vector<double> dur;
  for (const auto& r : sim) {
    if (r.legs[0].success()) dur.push_back(r.legs[0].duration_s);
  }
  std::sort(dur.begin(), dur.end());
  return {analysis::quantile_sorted(dur, 0.5),
          analysis::quantile_sorted(dur, 0.9)};
}

}  // namespace

TEST_CASE("fit hits the reference table targets within ten percent") {
  FitOptions opt;
  opt.seed = 2;
  const auto p = fit_profile_to_targets(0.135, 0.643, 0.047, opt);
  REQUIRE(p.mixture.components.size() == 2);
  const auto q = simulate_udp(p, 20000, 555);
  CHECK(q.median >= 0.135 * 0.9);
  CHECK(q.median <= 0.135 * 1.1);
  CHECK(q.q90 >= 0.643 * 0.9);
  CHECK(q.q90 <= 0.643 * 1.1);
}

TEST_CASE("fit converges for near-unimodal targets") {
  FitOptions opt;
  opt.seed = 3;
  const auto p = fit_profile_to_targets(0.08, 0.16, 0.0, opt);
  CHECK(p.loss_rate == 0.0);
  const auto q = simulate_udp(p, 12000, 556);
  CHECK(std::abs(q.median / 0.08 - 1.0) < 0.10);
  CHECK(std::abs(q.q90 / 0.16 - 1.0) < 0.10);
}

TEST_CASE("re-simulation with a fresh seed reproduces the quantiles") {
  FitOptions opt;
  opt.seed = 4;
  const auto p = fit_profile_to_targets(0.135, 0.643, 0.0, opt);
  const auto a = simulate_udp(p, 15000, 901);
  const auto b = simulate_udp(p, 15000, 902);
  CHECK(std::abs(a.median / b.median - 1.0) < 0.10);
  CHECK(std::abs(a.q90 / b.q90 - 1.0) < 0.10);
}

TEST_CASE("fit rejects infeasible target orderings") {
  CHECK_THROWS_AS(fit_profile_to_targets(0.5, 0.2, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_profile_to_targets(0.0, 0.2, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_profile_to_targets(0.1, 0.2, 1.0), ValidationError);
}

TEST_CASE("transaction-level loss maps to the per-datagram rate") {
  FitOptions opt;
  opt.seed = 5;
  opt.sim_rounds = 3000;
  const double txn_loss = 0.047;
  const auto p = fit_profile_to_targets(0.135, 0.643, txn_loss, opt);
  // Five exposures per small transaction: failure = 1 - (1-p_d)^5.
  const double implied = 1.0 - std::pow(1.0 - p.loss_rate, 5.0);
  CHECK(implied == doctest::Approx(txn_loss).epsilon(1e-9));

  BatchOptions bopt;
  bopt.seed = 6;
  const auto sim = run_batch_rounds({p}, Protocol::UDP, SizeClass::SMALL,
                                    TransportConfig{}, 20000, bopt);
  uint64_t ok = 0;
  for (const auto& r : sim) {
    if (r.legs[0].success()) ++ok;
  }
  const double rate = 1.0 - static_cast<double>(ok) / 20000.0;
  CHECK(rate == doctest::Approx(txn_loss).epsilon(0.15));
}
