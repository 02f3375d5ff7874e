// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
//
// Acceptance suite: one criterion per function, one pass/fail line each.
// Exit code is zero only when every criterion holds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "txbench/analysis.hpp"
#include "txbench/campaign.hpp"
#include "txbench/emulator.hpp"
#include "txbench/fit.hpp"
#include "txbench/message.hpp"
#include "txbench/multiaccess.hpp"
#include "txbench/persistence.hpp"
#include "txbench/scheduler.hpp"
#include "txbench/server.hpp"
#include "txbench/sockets.hpp"
#include "txbench/transport.hpp"
#include "txbench/wire.hpp"

#include "../unit/fixtures.hpp"
#include "../unit/oracle.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

using namespace txbench;

namespace {

namespace fs = std::filesystem;

struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

emu::LinkProfile fixed_delay(double d, const std::string& id,
                             uint64_t seed = 1) {
  emu::LinkProfile p;
  p.link_id = id;
  p.mixture.components = {{1.0, d, 0.0}};
  p.rng_seed = seed;
  return p;
}

message::WarningMessage small_msg() {
  return message::build_warning_message(sched::default_event(1),
                                        SizeClass::SMALL);
}

std::vector<double> successful_durations(
    const std::vector<multiaccess::Round>& rounds, size_t leg) {
  std::vector<double> out;
  for (const auto& r : rounds) {
    if (r.legs[leg].success()) out.push_back(r.legs[leg].duration_s);
  }
  return out;
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return analysis::quantile_sorted(xs, 0.5);
}

// ---------------------------------------------------------------------------
// 1. Round-trip models: UDP/TCP/SECURE medians of 100/200/500 ms +- 5 ms on a
//    50 ms deterministic link, 1000 transactions each, under 10 s wall time.
// ---------------------------------------------------------------------------
Checker criterion_round_trip_models() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto profile = fixed_delay(0.050, "op0", 21);
  emu::BatchOptions opt;
  opt.seed = 31;
  const struct {
    Protocol proto;
    double expect;
  } cases[] = {{Protocol::UDP, 0.100},
               {Protocol::TCP, 0.200},
               {Protocol::SECURE, 0.500}};
  for (const auto& [proto, expect] : cases) {
    const auto rounds = emu::run_batch_rounds({profile}, proto,
                                              SizeClass::SMALL,
                                              TransportConfig{}, 1000, opt);
    const auto durations = successful_durations(rounds, 0);
    c.expect(durations.size() == 1000,
             std::string(to_string(proto)) + ": not all succeeded");
    const double med = median_of(durations);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s median %.4f vs %.3f",
                  to_string(proto), med, expect);
    c.expect(std::abs(med - expect) <= 0.005, buf);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  c.expect(wall < 10.0, "virtual-time run exceeded 10 s wall time");
  return c;
}

// ---------------------------------------------------------------------------
// 2. Timeout semantics: outage -> CLIENT_TIMEOUT at exactly 6 s (virtual) and
//    6.000 +- 0.050 s elapsed on the real backend; a mid-transfer stall makes
//    the server reply prematurely after 5 s and the client record
//    BYTE_MISMATCH.
// ---------------------------------------------------------------------------
Checker criterion_timeout_semantics() {
  Checker c;
  // Virtual: full outage.
  {
    auto p = fixed_delay(0.050, "op0", 3);
    p.outages = {{0.0, 60.0}};
    emu::World world(emu::World::Mode::Virtual);
    emu::Network network(world, TransportConfig{});
    auto& ep = network.attach(p);
    emu::ActorScope scope(world);
    for (const Protocol proto : kAllProtocols) {
      const auto rec =
          transport::transact(proto, ep, small_msg(), TransportConfig{}, 1);
      c.expect(rec.status == StatusCode::CLIENT_TIMEOUT,
               std::string(to_string(proto)) + ": expected CLIENT_TIMEOUT");
      c.expect(rec.duration_s == 6.0,
               std::string(to_string(proto)) + ": virtual timeout not 6.0");
    }
  }
  // Real backend: a silent UDP sink, elapsed wall time 6.000 +- 0.050.
  {
    const int sink = ::socket(AF_INET, SOCK_DGRAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = 0;
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    ::bind(sink, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(sink, reinterpret_cast<sockaddr*>(&addr), &len);
    sockets::ServerAddress dead;
    dead.host = "127.0.0.1";
    dead.udp_port = ntohs(addr.sin_port);
    dead.tcp_port = dead.udp_port;
    dead.secure_port = dead.udp_port;
    sockets::RealEndpoint ep("op0", dead);
    const double t0 = sockets::steady_seconds();
    const auto rec =
        transport::udp_transact(ep, small_msg(), TransportConfig{}, 2);
    const double elapsed = sockets::steady_seconds() - t0;
    c.expect(rec.status == StatusCode::CLIENT_TIMEOUT, "real: no timeout");
    c.expect(rec.duration_s == 6.0, "real: recorded duration not 6.0");
    char buf[96];
    std::snprintf(buf, sizeof buf, "real elapsed %.3f s off 6.000", elapsed);
    c.expect(std::abs(elapsed - 6.0) <= 0.050, buf);
    ::close(sink);
  }
  // Mid-transfer stall: one dropped datagram, default-scale timeouts.
  {
    auto p = fixed_delay(0.050, "op0", 5);
    p.scripted_drops = {2};
    emu::World world(emu::World::Mode::Virtual);
    emu::Network network(world, TransportConfig{});
    auto& ep = network.attach(p);
    emu::ActorScope scope(world);
    const auto rec =
        transport::udp_transact(ep, small_msg(), TransportConfig{}, 3);
    c.expect(rec.status == StatusCode::BYTE_MISMATCH,
             "stall: expected BYTE_MISMATCH");
    c.expect(std::abs(rec.duration_s - 5.1) < 0.05,
             "stall: duration not ~5 s + RTT");
    const auto slog = network.server_log();
    c.expect(slog.size() == 1 && slog[0].premature,
             "stall: server reply not premature");
    if (!slog.empty()) {
      c.expect(std::abs((slog[0].replied_at_s - slog[0].last_data_at_s) -
                        5.0) < 0.01,
               "stall: premature reply not 5 s after last data");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// 3. Multi-access availability composition: leg successes (0.9, 0.8, 0.7)
//    compose to 1 - 0.1*0.2*0.3 = 99.4% +- 0.2% over 100k virtual rounds.
// ---------------------------------------------------------------------------
Checker criterion_availability_composition() {
  Checker c;
  const double leg_success[] = {0.9, 0.8, 0.7};
  std::vector<emu::LinkProfile> profiles;
  for (int i = 0; i < 3; ++i) {
    auto p = fixed_delay(0.030, "op" + std::to_string(i), 60 + i);
    p.loss_rate = 1.0 - std::pow(leg_success[i], 1.0 / 5.0);
    profiles.push_back(p);
  }
  emu::BatchOptions opt;
  opt.seed = 41;
  const uint64_t n = 100000;
  const auto rounds = emu::run_batch_rounds(profiles, Protocol::UDP,
                                            SizeClass::SMALL,
                                            TransportConfig{}, n, opt);
  // Per-leg sanity: each leg close to its configured success probability.
  for (int i = 0; i < 3; ++i) {
    uint64_t ok = 0;
    for (const auto& r : rounds) ok += r.legs[i].success() ? 1 : 0;
    const double rate = double(ok) / double(n);
    char buf[96];
    std::snprintf(buf, sizeof buf, "leg %d success %.4f vs %.1f", i, rate,
                  leg_success[i]);
    c.expect(std::abs(rate - leg_success[i]) < 0.01, buf);
  }
  uint64_t ma_ok = 0;
  for (const auto& r : rounds) ma_ok += multiaccess::best_of(r).success();
  const double ma_rate = double(ma_ok) / double(n);
  char buf[96];
  std::snprintf(buf, sizeof buf, "MA availability %.4f vs 0.994", ma_rate);
  c.expect(std::abs(ma_rate - 0.994) <= 0.002, buf);
  return c;
}

// ---------------------------------------------------------------------------
// 4. Order-statistic gain on profiles fitted to the reference UDP quantiles:
//    MA ECDF matches 1-(1-F)^3 (KS < 0.02 at 50k rounds), MA median is lower,
//    and the relative median reduction lands in 46% +- 15 points.
// ---------------------------------------------------------------------------
Checker criterion_order_statistic_gain() {
  Checker c;
  emu::FitOptions fopt;
  fopt.seed = 8;
  const auto fitted = emu::fit_profile_to_targets(0.135, 0.643, 0.0, fopt);

  std::vector<emu::LinkProfile> profiles;
  for (int i = 0; i < 3; ++i) {
    auto p = fitted;
    p.link_id = "op" + std::to_string(i);
    p.rng_seed = derive_seed(90, i);
    profiles.push_back(p);
  }
  emu::BatchOptions opt;
  opt.seed = 91;
  const uint64_t n = 50000;
  const auto rounds = emu::run_batch_rounds(profiles, Protocol::UDP,
                                            SizeClass::SMALL,
                                            TransportConfig{}, n, opt);

  std::vector<double> singles;
  std::vector<double> ma;
  for (const auto& r : rounds) {
    for (const auto& leg : r.legs) {
      if (leg.success()) singles.push_back(leg.duration_s);
    }
    const auto best = multiaccess::best_of(r);
    if (best.success()) ma.push_back(best.duration_s);
  }
  c.expect(ma.size() == n, "zero-loss rounds should all succeed");

  // Order-statistic oracle: transform the pooled single-leg ECDF.
  std::sort(singles.begin(), singles.end());
  std::vector<double> transformed;  // sample from 1-(1-F)^3 via inverse method
  emu::Rng rng(4242);
  transformed.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    // u ~ U(0,1); G^{-1}(u) = F^{-1}(1 - (1-u)^{1/3})
    const double u = rng.u01();
    const double q = 1.0 - std::cbrt(1.0 - u);
    transformed.push_back(analysis::quantile_sorted(singles, q));
  }
  const double ks = analysis::ks_statistic(ma, transformed);
  char buf[128];
  std::snprintf(buf, sizeof buf, "KS(MA, 1-(1-F)^3) = %.4f", ks);
  c.expect(ks < 0.02, buf);

  const double med_single = median_of(singles);
  const double med_ma = median_of(ma);
  std::snprintf(buf, sizeof buf, "medians: single %.4f, MA %.4f", med_single,
                med_ma);
  c.expect(med_ma < med_single, buf);
  const double gain = 1.0 - med_ma / med_single;
  std::snprintf(buf, sizeof buf,
                "relative median reduction %.1f%% (band 31%%..61%%)",
                gain * 100.0);
  c.expect(gain >= 0.31 && gain <= 0.61, buf);
  return c;
}

// ---------------------------------------------------------------------------
// 5. Deadline availability: with loss and mixtures fitted to the reference
//    UDP targets, MA improves the 0.2 s availability by at least 25 points,
//    and availability is monotone across 6 / 1 / 0.2 s for every protocol
//    and mode.
// ---------------------------------------------------------------------------
Checker criterion_deadline_availability() {
  Checker c;
  emu::FitOptions fopt;
  fopt.seed = 12;
  const auto fitted = emu::fit_profile_to_targets(0.135, 0.643, 0.047, fopt);
  std::vector<emu::LinkProfile> profiles;
  for (int i = 0; i < 3; ++i) {
    auto p = fitted;
    p.link_id = "op" + std::to_string(i);
    p.rng_seed = derive_seed(95, i);
    profiles.push_back(p);
  }

  const double limits[] = {6.0, 1.0, 0.2};
  for (const Protocol proto : kAllProtocols) {
    emu::BatchOptions opt;
    opt.seed = 96 + static_cast<int>(proto);
    const uint64_t n = proto == Protocol::UDP ? 30000 : 8000;
    const auto rounds = emu::run_batch_rounds(profiles, proto,
                                              SizeClass::SMALL,
                                              TransportConfig{}, n, opt);
    const auto avail = [&](bool use_ma, double limit) {
      uint64_t ok = 0, total = 0;
      for (const auto& r : rounds) {
        if (use_ma) {
          const auto best = multiaccess::best_of(r);
          total++;
          ok += best.success() && best.duration_s <= limit;
        } else {
          for (const auto& leg : r.legs) {
            total++;
            ok += leg.success() && leg.duration_s <= limit;
          }
        }
      }
      return double(ok) / double(total);
    };

    // Monotonicity across the three rows for single and MA.
    for (const bool use_ma : {false, true}) {
      double prev = 1.1;
      for (const double limit : limits) {
        const double rate = avail(use_ma, limit);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s %s availability not monotone",
                      to_string(proto), use_ma ? "MA" : "single");
        c.expect(rate <= prev + 1e-12, buf);
        prev = rate;
      }
    }

    if (proto == Protocol::UDP) {
      const double single_02 = avail(false, 0.2);
      const double ma_02 = avail(true, 0.2);
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "0.2 s availability: single %.3f -> MA %.3f (need +0.25)",
                    single_02, ma_02);
      c.expect(ma_02 - single_02 >= 0.25, buf);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// 6. Analysis oracle equivalence on 1000-record fixtures, plus the exact
//    reference cross-checks 13770/14448 = 95.3% and 14364/14448 = 99.4%.
// ---------------------------------------------------------------------------
Checker criterion_analysis_oracles() {
  Checker c;
  const auto recs = fixtures::make_records(4242, 1000);
  std::vector<double> dur;
  for (const auto& r : recs) {
    if (r.txn.success()) dur.push_back(r.txn.duration_s);
  }
  const auto s = analysis::summarize(recs);
  const auto close = [](double a, double b) {
    return std::abs(a - b) <=
           1e-9 * std::max({std::abs(a), std::abs(b), 1.0});
  };
  c.expect(close(s.mean_s, double(oracle::mean(dur))), "mean off oracle");
  c.expect(close(s.stddev_s, double(oracle::sample_stddev(dur))),
           "stddev off oracle");
  c.expect(close(s.median_s, oracle::quantile(dur, 0.5)), "median off oracle");
  c.expect(close(s.q90_s, oracle::quantile(dur, 0.9)), "q90 off oracle");

  const auto pts = analysis::ecdf(recs);
  const auto ref = oracle::ecdf(dur);
  c.expect(pts.size() == ref.size(), "ecdf point count off oracle");
  for (size_t i = 0; i < std::min(pts.size(), ref.size()); ++i) {
    c.expect(close(pts[i].duration_s, ref[i].first) &&
                 close(pts[i].fraction, ref[i].second),
             "ecdf point off oracle");
    if (!c.ok) break;
  }

  std::vector<double> rsrp, d6;
  for (const auto& r : recs) {
    rsrp.push_back(*r.txn.meta.rsrp_dbm);
    d6.push_back(r.txn.success() ? r.txn.duration_s : 6.0);
  }
  const auto sp = analysis::spearman_rsrp(recs, 6.0);
  const double sp_ref = double(oracle::spearman(rsrp, d6));
  c.expect(sp.state == analysis::SpearmanResult::State::Ok, "spearman state");
  c.expect(std::abs(sp.rho - sp_ref) <= 1e-12, "spearman off oracle");

  // Availability: brute count, then the exact table cross-checks.
  {
    size_t ok = 0;
    for (const auto& r : recs) {
      if (r.txn.success() && r.txn.duration_s <= 0.2) ++ok;
    }
    const auto cell = analysis::availability(recs, 0.2);
    c.expect(cell.successful_within == ok, "availability count off oracle");
  }
  {
    std::vector<persistence::LogRecord> big;
    big.reserve(14448);
    for (int i = 0; i < 14448; ++i) {
      persistence::LogRecord r;
      r.txn.protocol = Protocol::UDP;
      r.txn.link_id = "op0";
      r.txn.status =
          i < 13770 ? StatusCode::SUCCESS : StatusCode::CLIENT_TIMEOUT;
      r.txn.duration_s = i < 13770 ? 0.135 : 6.0;
      big.push_back(r);
    }
    const auto cell = analysis::availability(big, 6.0);
    c.expect(cell.rate == 13770.0 / 14448.0, "95.3% cross-check not exact");
    c.expect(std::round(cell.rate * 1000.0) == 953.0, "rate does not read 95.3%");
    for (auto& r : big) {
      r.txn.status = StatusCode::CLIENT_TIMEOUT;
      r.txn.duration_s = 6.0;
    }
    for (int i = 0; i < 14364; ++i) {
      big[i].txn.status = StatusCode::SUCCESS;
      big[i].txn.duration_s = 0.073;
    }
    const auto ma_cell = analysis::availability(big, 6.0);
    c.expect(ma_cell.rate == 14364.0 / 14448.0, "99.4% cross-check not exact");
    c.expect(std::round(ma_cell.rate * 1000.0) == 994.0,
             "rate does not read 99.4%");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 7. Scheduler census: the default emulated campaign writes exactly 1080
//    records, and a 50 ms skew injected into 30% of rounds leaves the
//    synchronization filter keeping 70% +- 2%.
// ---------------------------------------------------------------------------
Checker criterion_scheduler_census() {
  Checker c;
  const auto tmp = fs::temp_directory_path() / "txbench_acceptance";
  fs::create_directories(tmp);

  sched::EmuRunConfig cfg;
  cfg.experiment.seed = 7;
  for (int i = 0; i < 3; ++i) {
    auto p = fixed_delay(0.03 + 0.01 * i, "op" + std::to_string(i), 70 + i);
    p.mixture.components[0].sigma_log = 0.2;
    cfg.links.push_back(p);
  }
  {
    persistence::LogWriter writer((tmp / "census.jsonl").string());
    const size_t n = sched::run_emulated_experiment(cfg, writer);
    c.expect(n == 1080, "census: expected exactly 1080 records");
    const auto records = persistence::load(writer.path());
    c.expect(records.size() == 1080, "census: log line count");
  }
  {
    auto skew_cfg = cfg;
    skew_cfg.experiment.skew_injection.fraction = 0.30;
    skew_cfg.experiment.skew_injection.skew_s = 0.050;
    persistence::LogWriter writer((tmp / "skew.jsonl").string());
    sched::run_emulated_experiment(skew_cfg, writer);
    const auto records = persistence::load(writer.path());
    auto rounds = analysis::group_rounds(records);
    const size_t total = rounds.size();
    const auto kept = analysis::filter_synchronized(std::move(rounds), 0.010);
    const double retained = double(kept.size()) / double(total);
    char buf[96];
    std::snprintf(buf, sizeof buf, "retained %.3f vs 0.70 +- 0.02", retained);
    c.expect(std::abs(retained - 0.70) <= 0.02, buf);
  }
  return c;
}

// ---------------------------------------------------------------------------
// 8. Determinism: identical configs and seeds give byte-identical logs and
//    byte-identical report tables.
// ---------------------------------------------------------------------------
Checker criterion_determinism() {
  Checker c;
  const auto tmp = fs::temp_directory_path() / "txbench_acceptance";
  fs::create_directories(tmp);

  sched::EmuRunConfig cfg;
  cfg.experiment.run_duration_s = 600.0;
  cfg.experiment.seed = 99;
  for (int i = 0; i < 3; ++i) {
    emu::LinkProfile p;
    p.link_id = "op" + std::to_string(i);
    p.mixture.components = {{0.7, 0.030, 0.4}, {0.3, 0.120, 0.4}};
    p.loss_rate = 0.05;
    cfg.links.push_back(p);
  }

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };

  const auto log_a = tmp / "det_a.jsonl";
  const auto log_b = tmp / "det_b.jsonl";
  {
    persistence::LogWriter w(log_a.string());
    sched::run_emulated_experiment(cfg, w);
  }
  {
    persistence::LogWriter w(log_b.string());
    sched::run_emulated_experiment(cfg, w);
  }
  c.expect(!slurp(log_a).empty(), "empty campaign log");
  c.expect(slurp(log_a) == slurp(log_b), "logs differ across identical runs");

  const auto rep_a = analysis::write_report(log_a.string(),
                                            (tmp / "rep_a").string());
  const auto rep_b = analysis::write_report(log_b.string(),
                                            (tmp / "rep_b").string());
  c.expect(rep_a.files.size() == rep_b.files.size(), "report file sets differ");
  for (size_t i = 0; i < std::min(rep_a.files.size(), rep_b.files.size());
       ++i) {
    c.expect(slurp(rep_a.files[i]) == slurp(rep_b.files[i]),
             "report tables differ across identical runs");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 9. Closure exclusion: a 1 s teardown delay shifts no TCP/SECURE duration by
//    more than 1 ms.
// ---------------------------------------------------------------------------
Checker criterion_closure_exclusion() {
  Checker c;
  const auto run_with = [&](double teardown) {
    TransportConfig cfg;
    cfg.teardown_delay_s = teardown;
    emu::World world(emu::World::Mode::Virtual);
    emu::Network network(world, cfg);
    auto& ep = network.attach(fixed_delay(0.050, "op0", 17));
    emu::ActorScope scope(world);
    std::vector<double> out;
    for (int i = 0; i < 25; ++i) {
      out.push_back(
          transport::tcp_transact(ep, small_msg(), cfg, 100 + i).duration_s);
      out.push_back(
          transport::secure_transact(ep, small_msg(), cfg, 200 + i)
              .duration_s);
    }
    return out;
  };
  const auto base = run_with(0.0);
  const auto delayed = run_with(1.0);
  c.expect(base.size() == delayed.size(), "sample counts differ");
  double worst = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    worst = std::max(worst, std::abs(base[i] - delayed[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max duration shift %.6f s", worst);
  c.expect(worst <= 0.001, buf);
  return c;
}

}  // namespace

int main() {
  const struct {
    const char* name;
    std::function<Checker()> fn;
  } criteria[] = {
      {"round-trip models (1/2/5 RTT medians, virtual-time budget)",
       criterion_round_trip_models},
      {"timeout semantics (6 s client, 5 s server stall)",
       criterion_timeout_semantics},
      {"multi-access availability composition (99.4% +- 0.2%)",
       criterion_availability_composition},
      {"order-statistic gain (KS < 0.02, median reduction band)",
       criterion_order_statistic_gain},
      {"deadline availability (+25 points at 0.2 s, monotone rows)",
       criterion_deadline_availability},
      {"analysis oracle equivalence (1e-9 / 1e-12, exact cross-checks)",
       criterion_analysis_oracles},
      {"scheduler census (1080 records, 70% +- 2% retention)",
       criterion_scheduler_census},
      {"determinism (byte-identical logs and reports)",
       criterion_determinism},
      {"closure exclusion (teardown delay shifts nothing by > 1 ms)",
       criterion_closure_exclusion},
  };

  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Checker result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (result.ok) {
      std::printf("[PASS] criterion %d: %s\n", index, name);
    } else {
      std::printf("[FAIL] criterion %d: %s -- %s\n", index, name,
                  result.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("acceptance: all %d criteria passed\n", index);
  } else {
    std::printf("acceptance: %d of %d criteria FAILED\n", failures, index);
  }
  return failures == 0 ? 0 : 1;
}
