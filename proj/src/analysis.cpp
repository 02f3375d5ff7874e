// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "txbench/multiaccess.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace txbench::analysis {

namespace {

constexpr size_t kBlock = 8192;

bool use_parallel(Exec exec, size_t n) {
#ifdef _OPENMP
  return exec == Exec::Parallel && n >= 2 * kBlock;
#else
  (void)exec;
  (void)n;
  return false;
#endif
}

/// Deterministic reduction: per-block partials computed in parallel, then
/// folded in block order. Results are identical for any thread count and
/// match the serial fold up to the block regrouping.
template <class Fn>
double blocked_sum(size_t n, Exec exec, Fn&& term) {
  if (n == 0) return 0.0;
  if (!use_parallel(exec, n)) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += term(i);
    return acc;
  }
  const size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
    const size_t lo = static_cast<size_t>(b) * kBlock;
    const size_t hi = std::min(n, lo + kBlock);
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<size_t>(b)] = acc;
  }
  double acc = 0.0;
  for (const double p : partial) acc += p;
  return acc;
}

template <class Fn>
size_t blocked_count(size_t n, Exec exec, Fn&& pred) {
  if (n == 0) return 0;
  if (!use_parallel(exec, n)) {
    size_t acc = 0;
    for (size_t i = 0; i < n; ++i) acc += pred(i) ? 1 : 0;
    return acc;
  }
  const size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<size_t> partial(nblocks, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
    const size_t lo = static_cast<size_t>(b) * kBlock;
    const size_t hi = std::min(n, lo + kBlock);
    size_t acc = 0;
    for (size_t i = lo; i < hi; ++i) acc += pred(i) ? 1 : 0;
    partial[static_cast<size_t>(b)] = acc;
  }
  size_t acc = 0;
  for (const size_t p : partial) acc += p;
  return acc;
}

std::vector<double> successful_durations(
    std::span<const persistence::LogRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.txn.success()) out.push_back(r.txn.duration_s);
  }
  return out;
}

/// Average ranks (1-based) with ties averaged.
std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 +
                       1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  if (lo == hi) return sorted[lo];
  const double frac = pos - static_cast<double>(lo);
  return std::lerp(sorted[lo], sorted[hi], frac);
}

SummaryStats summarize(std::span<const persistence::LogRecord> records,
                       Exec exec) {
  SummaryStats s;
  s.attempted = records.size();
  auto durations = successful_durations(records);
  s.successful = durations.size();
  if (durations.empty()) return s;

  s.has_stats = true;
  const size_t n = durations.size();
  const double sum = blocked_sum(n, exec, [&](size_t i) { return durations[i]; });
  s.mean_s = sum / static_cast<double>(n);
  if (n >= 2) {
    const double m = s.mean_s;
    const double ss = blocked_sum(n, exec, [&](size_t i) {
      const double d = durations[i] - m;
      return d * d;
    });
    s.stddev_s = std::sqrt(ss / static_cast<double>(n - 1));
  }
  std::sort(durations.begin(), durations.end());
  s.min_s = durations.front();
  s.max_s = durations.back();
  s.median_s = quantile_sorted(durations, 0.5);
  s.q90_s = quantile_sorted(durations, 0.9);
  return s;
}

AvailabilityCell availability(std::span<const persistence::LogRecord> records,
                              double time_limit_s, Exec exec) {
  if (time_limit_s <= 0.0) throw ValidationError("time limit must be > 0");
  AvailabilityCell cell;
  cell.time_limit_s = time_limit_s;
  cell.attempted = records.size();
  cell.successful_within = blocked_count(records.size(), exec, [&](size_t i) {
    const auto& t = records[i].txn;
    return t.success() && t.duration_s <= time_limit_s;
  });
  cell.rate = cell.attempted == 0
                  ? 0.0
                  : static_cast<double>(cell.successful_within) /
                        static_cast<double>(cell.attempted);
  return cell;
}

std::vector<EcdfPoint> ecdf(std::span<const persistence::LogRecord> records,
                            Exec exec) {
  (void)exec;  // sorting dominates; kept serial
  auto durations = successful_durations(records);
  std::vector<EcdfPoint> out;
  if (durations.empty()) return out;
  std::sort(durations.begin(), durations.end());
  const double n = static_cast<double>(durations.size());
  for (size_t i = 0; i < durations.size(); ++i) {
    if (i + 1 < durations.size() && durations[i + 1] == durations[i]) continue;
    out.push_back({durations[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

SpearmanResult spearman_rsrp(std::span<const persistence::LogRecord> records,
                             double fail_duration_s, Exec exec) {
  std::vector<double> rsrp;
  std::vector<double> dur;
  for (const auto& r : records) {
    if (!r.txn.meta.rsrp_dbm) continue;
    rsrp.push_back(*r.txn.meta.rsrp_dbm);
    dur.push_back(r.txn.success() ? r.txn.duration_s : fail_duration_s);
  }
  SpearmanResult res;
  res.n = rsrp.size();
  if (rsrp.size() < 3) {
    res.state = SpearmanResult::State::Insufficient;
    return res;
  }
  const auto rx = average_ranks(rsrp);
  const auto ry = average_ranks(dur);
  const size_t n = rx.size();
  const double mean_rank = (static_cast<double>(n) + 1.0) / 2.0;
  const double sxy = blocked_sum(n, exec, [&](size_t i) {
    return (rx[i] - mean_rank) * (ry[i] - mean_rank);
  });
  const double sxx = blocked_sum(n, exec, [&](size_t i) {
    const double d = rx[i] - mean_rank;
    return d * d;
  });
  const double syy = blocked_sum(n, exec, [&](size_t i) {
    const double d = ry[i] - mean_rank;
    return d * d;
  });
  if (sxx <= 0.0 || syy <= 0.0) {
    res.state = SpearmanResult::State::Degenerate;
    res.rho = 0.0;
    return res;
  }
  res.state = SpearmanResult::State::Ok;
  res.rho = sxy / std::sqrt(sxx * syy);
  return res;
}

std::vector<RoundGroup> group_rounds(
    std::span<const persistence::LogRecord> records) {
  std::map<std::pair<uint64_t, int>, RoundGroup> groups;
  for (const auto& r : records) {
    const auto key =
        std::make_pair(r.round_index, static_cast<int>(r.txn.protocol));
    auto& g = groups[key];
    if (g.legs.empty()) {
      g.round_index = r.round_index;
      g.protocol = r.txn.protocol;
      g.start_skew_s = r.start_skew_s;
    }
    g.legs.push_back(&r);
  }
  std::vector<RoundGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<RoundGroup> filter_synchronized(std::vector<RoundGroup> rounds,
                                            double max_skew_s) {
  std::vector<RoundGroup> out;
  out.reserve(rounds.size());
  for (auto& g : rounds) {
    if (g.start_skew_s <= max_skew_s) out.push_back(std::move(g));
  }
  return out;
}

std::vector<persistence::LogRecord> derive_multiaccess(
    const std::vector<RoundGroup>& rounds, double client_timeout_s,
    Exec exec) {
  std::vector<persistence::LogRecord> out(rounds.size());
  const auto derive_one = [&](size_t i) {
    const auto& g = rounds[i];
    multiaccess::Round round;
    round.round_index = g.round_index;
    round.protocol = g.protocol;
    round.start_skew_s = g.start_skew_s;
    round.legs.reserve(g.legs.size());
    for (const auto* leg : g.legs) round.legs.push_back(leg->txn);
    persistence::LogRecord rec;
    rec.round_index = g.round_index;
    rec.start_skew_s = g.start_skew_s;
    rec.size_class = g.legs.empty() ? SizeClass::SMALL : g.legs[0]->size_class;
    rec.txn = multiaccess::best_of(round, client_timeout_s);
    out[i] = std::move(rec);
  };
  const size_t n = rounds.size();
#ifdef _OPENMP
  if (exec == Exec::Parallel && n >= 1024) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      derive_one(static_cast<size_t>(i));
    }
    return out;
  }
#else
  (void)exec;
#endif
  for (size_t i = 0; i < n; ++i) derive_one(i);
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("ks_statistic needs non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, size_t n, size_t m) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    static_cast<double>(n + m);
  const double lambda =
      (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::pow(-1.0, k - 1) *
                        std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace txbench::analysis
