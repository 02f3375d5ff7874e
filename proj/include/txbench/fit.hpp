// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include "txbench/emulator.hpp"

namespace txbench::emu {

struct FitOptions {
  uint64_t seed = 1;
  int max_iters = 30;
  uint64_t sim_rounds = 6000;    // rounds per calibration step
  uint64_t verify_rounds = 20000;
  double tolerance = 0.10;       // relative, on both targets
};

/// Calibrates a two-component latency mixture so that the simulated
/// single-link UDP transaction (small message) hits the given median and 90%
/// quantile within tolerance. `txn_loss` is the target transaction failure
/// probability; it is converted to the per-datagram loss rate the small
/// message exposes (four data datagrams plus the reply).
///
/// Throws CalibrationError when the iteration budget runs out.
LinkProfile fit_profile_to_targets(double median_s, double q90_s,
                                   double txn_loss,
                                   const FitOptions& opt = {});

}  // namespace txbench::emu
