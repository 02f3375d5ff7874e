// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "txbench/persistence.hpp"
#include "txbench/types.hpp"

namespace txbench::analysis {

/// Kernel selection. Parallel kernels use OpenMP with fixed-block partial
/// reductions, so their results do not depend on the thread count; the serial
/// kernels remain the reference the parallel path is tested against.
enum class Exec { Serial, Parallel };

/// Transaction-time statistics over one (protocol, mode) record set.
/// Statistics are computed over successful transactions only; `attempted`
/// counts everything.
struct SummaryStats {
  size_t attempted = 0;
  size_t successful = 0;
  bool has_stats = false;  // false when no transaction succeeded
  double mean_s = 0.0;
  double stddev_s = 0.0;  // sample standard deviation (n-1); 0 when n < 2
  double median_s = 0.0;
  double min_s = 0.0;
  double q90_s = 0.0;
  double max_s = 0.0;
};

struct AvailabilityCell {
  double time_limit_s = 0.0;
  size_t attempted = 0;
  size_t successful_within = 0;
  double rate = 0.0;
};

struct EcdfPoint {
  double duration_s = 0.0;
  double fraction = 0.0;
};

struct SpearmanResult {
  enum class State { Ok, Insufficient, Degenerate };
  State state = State::Insufficient;
  double rho = 0.0;
  size_t n = 0;
};

/// Quantile with linear interpolation between order statistics, the rule all
/// reported medians and 90% quantiles use. `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

SummaryStats summarize(std::span<const persistence::LogRecord> records,
                       Exec exec = Exec::Parallel);

/// Share of attempted transactions that succeeded within `time_limit`.
AvailabilityCell availability(std::span<const persistence::LogRecord> records,
                              double time_limit_s, Exec exec = Exec::Parallel);

/// Right-continuous ECDF over successful durations; the denominator is the
/// successful count.
std::vector<EcdfPoint> ecdf(std::span<const persistence::LogRecord> records,
                            Exec exec = Exec::Parallel);

/// Spearman rank correlation between RSRP and transaction time. Records
/// without RSRP are ignored; failed transactions enter at `fail_duration_s`.
/// Ties get average ranks.
SpearmanResult spearman_rsrp(std::span<const persistence::LogRecord> records,
                             double fail_duration_s = 6.0,
                             Exec exec = Exec::Parallel);

/// Per-(round, protocol) view over a loaded log.
struct RoundGroup {
  uint64_t round_index = 0;
  Protocol protocol = Protocol::UDP;
  double start_skew_s = 0.0;
  std::vector<const persistence::LogRecord*> legs;
};

std::vector<RoundGroup> group_rounds(
    std::span<const persistence::LogRecord> records);

/// Keeps exactly the rounds whose legs started within `max_skew` of each
/// other.
std::vector<RoundGroup> filter_synchronized(std::vector<RoundGroup> rounds,
                                            double max_skew_s = 0.010);

/// Batch best-of-round: one "MA" record per round.
std::vector<persistence::LogRecord> derive_multiaccess(
    const std::vector<RoundGroup>& rounds, double client_timeout_s = 6.0,
    Exec exec = Exec::Parallel);

/// Two-sample Kolmogorov-Smirnov distance and its asymptotic p-value.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_pvalue(double d, size_t n, size_t m);

struct ReportOptions {
  double max_skew_s = 0.010;
  double client_timeout_s = 6.0;
  std::vector<double> time_limits_s = {6.0, 1.0, 0.2};
  Exec exec = Exec::Parallel;
};

struct ReportResult {
  size_t records = 0;
  size_t malformed_lines = 0;
  size_t rounds = 0;
  size_t kept_rounds = 0;
  std::vector<std::string> files;
};

/// Reads a transaction log and emits the table and ECDF data files into
/// `out_dir` (created if missing): per size class a transaction-time summary
/// table, an availability table, and one ECDF series per (protocol, mode).
/// Deterministic for a given log.
ReportResult write_report(const std::string& log_path,
                          const std::string& out_dir,
                          const ReportOptions& opt = {});

}  // namespace txbench::analysis
