// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
//
// Brute-force reference implementations used only by the tests. Everything
// here is written the naive way, independently of the library's kernels, so
// the two sides act as cross-checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline long double mean(const std::vector<double>& xs) {
  long double s = 0.0L;
  for (double x : xs) s += x;
  return s / static_cast<long double>(xs.size());
}

inline long double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0L;
  const long double m = mean(xs);
  long double ss = 0.0L;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<long double>(xs.size() - 1));
}

/// Linear interpolation between order statistics at q*(n-1).
inline double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  if (xs.empty()) return 0.0;
  if (q <= 0.0) return xs.front();
  if (q >= 1.0) return xs.back();
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

/// ECDF as (value, fraction <= value) over unique sorted values.
inline std::vector<std::pair<double, double>> ecdf(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t count = 0;
    for (double y : xs) {
      if (y <= xs[i]) ++count;
    }
    const double frac =
        static_cast<double>(count) / static_cast<double>(xs.size());
    if (out.empty() || out.back().first != xs[i]) {
      out.emplace_back(xs[i], frac);
    }
  }
  return out;
}

/// Average rank of element i computed directly from pairwise comparisons:
/// 1 + (#smaller) + (#equal - 1) / 2.
inline std::vector<long double> ranks(const std::vector<double>& xs) {
  std::vector<long double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t smaller = 0, equal = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] < xs[i]) ++smaller;
      if (xs[j] == xs[i]) ++equal;
    }
    out[i] = 1.0L + static_cast<long double>(smaller) +
             (static_cast<long double>(equal) - 1.0L) / 2.0L;
  }
  return out;
}

/// Spearman rho as the Pearson correlation of average ranks.
inline long double spearman(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const auto n = static_cast<long double>(xs.size());
  long double mx = 0.0L, my = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
