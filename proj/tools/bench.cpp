// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

// Compares the serial reference kernels against the OpenMP ones on synthetic
// data and checks they agree. Run manually; not part of the test suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "txbench/analysis.hpp"
#include "txbench/campaign.hpp"
#include "txbench/emulator.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<txbench::persistence::LogRecord> synthetic_records(size_t n,
                                                               uint64_t seed) {
  txbench::emu::Rng rng(seed);
  std::vector<txbench::persistence::LogRecord> out(n);
  for (size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.round_index = i / 3;
    r.txn.protocol = txbench::Protocol::UDP;
    r.txn.link_id = "op" + std::to_string(i % 3);
    r.txn.txn_id = i + 1;
    const bool ok = rng.u01() > 0.05;
    r.txn.status = ok ? txbench::StatusCode::SUCCESS
                      : txbench::StatusCode::CLIENT_TIMEOUT;
    r.txn.duration_s = ok ? 0.03 * std::exp(0.8 * rng.normal()) : 6.0;
    r.txn.bytes_sent = 5600;
    r.txn.bytes_acked = ok ? 5600 : 0;
    r.txn.meta.rsrp_dbm = -120.0 + 60.0 * rng.u01();
  }
  return out;
}

template <class F>
double timed(const char* label, F&& fn) {
  const auto t0 = Clock::now();
  fn();
  const double dt = seconds_since(t0);
  std::printf("  %-32s %8.3f s\n", label, dt);
  return dt;
}

bool close_enough(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

int main(int argc, char** argv) {
  size_t n = 4'000'000;
  uint64_t rounds = 20'000;
  if (argc > 1) n = std::stoull(argv[1]);
  if (argc > 2) rounds = std::stoull(argv[2]);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; parallel paths fall back to serial\n");
#endif

  using txbench::analysis::Exec;
  const auto records = synthetic_records(n, 7);
  std::printf("analysis kernels on %zu records:\n", records.size());

  txbench::analysis::SummaryStats s_ser, s_par;
  const double t_sum_s =
      timed("summarize (serial)", [&] { s_ser = summarize(records, Exec::Serial); });
  const double t_sum_p = timed("summarize (parallel)", [&] {
    s_par = summarize(records, Exec::Parallel);
  });
  txbench::analysis::AvailabilityCell a_ser, a_par;
  const double t_av_s = timed("availability (serial)", [&] {
    a_ser = availability(records, 0.2, Exec::Serial);
  });
  const double t_av_p = timed("availability (parallel)", [&] {
    a_par = availability(records, 0.2, Exec::Parallel);
  });
  txbench::analysis::SpearmanResult r_ser, r_par;
  const double t_sp_s = timed("spearman (serial)", [&] {
    r_ser = spearman_rsrp(records, 6.0, Exec::Serial);
  });
  const double t_sp_p = timed("spearman (parallel)", [&] {
    r_par = spearman_rsrp(records, 6.0, Exec::Parallel);
  });

  bool ok = true;
  ok &= close_enough(s_ser.mean_s, s_par.mean_s, 1e-12);
  ok &= close_enough(s_ser.stddev_s, s_par.stddev_s, 1e-12);
  ok &= s_ser.median_s == s_par.median_s && s_ser.q90_s == s_par.q90_s;
  ok &= a_ser.successful_within == a_par.successful_within;
  ok &= std::abs(r_ser.rho - r_par.rho) <= 1e-12;  // rho sits near zero here

  std::printf("campaign engine, %llu rounds x 3 links:\n",
              static_cast<unsigned long long>(rounds));
  txbench::emu::LinkProfile p;
  p.link_id = "op0";
  p.mixture.components = {{0.7, 0.030, 0.5}, {0.3, 0.120, 0.4}};
  p.loss_rate = 0.02;
  std::vector<txbench::emu::LinkProfile> profiles;
  for (int i = 0; i < 3; ++i) {
    auto q = p;
    q.link_id = "op" + std::to_string(i);
    profiles.push_back(q);
  }
  txbench::TransportConfig cfg;
  txbench::emu::BatchOptions opt;
  opt.seed = 11;

  std::vector<txbench::multiaccess::Round> rounds_ser, rounds_par;
  opt.parallel = false;
  const double t_c_s = timed("batch rounds (serial)", [&] {
    rounds_ser = run_batch_rounds(profiles, txbench::Protocol::UDP,
                                  txbench::SizeClass::SMALL, cfg, rounds, opt);
  });
  opt.parallel = true;
  const double t_c_p = timed("batch rounds (parallel)", [&] {
    rounds_par = run_batch_rounds(profiles, txbench::Protocol::UDP,
                                  txbench::SizeClass::SMALL, cfg, rounds, opt);
  });
  bool campaign_equal = rounds_ser.size() == rounds_par.size();
  for (size_t i = 0; campaign_equal && i < rounds_ser.size(); ++i) {
    for (size_t j = 0; j < rounds_ser[i].legs.size(); ++j) {
      const auto& a = rounds_ser[i].legs[j];
      const auto& b = rounds_par[i].legs[j];
      if (a.duration_s != b.duration_s || a.status != b.status) {
        campaign_equal = false;
        break;
      }
    }
  }
  ok &= campaign_equal;

  std::printf("speedups: summarize %.2fx, availability %.2fx, spearman %.2fx, "
              "campaign %.2fx\n",
              t_sum_s / t_sum_p, t_av_s / t_av_p, t_sp_s / t_sp_p,
              t_c_s / t_c_p);
  std::printf("serial/parallel agreement: %s\n", ok ? "OK" : "MISMATCH");
  return ok ? 0 : 1;
}
