// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <vector>

#include "txbench/emulator.hpp"
#include "txbench/multiaccess.hpp"

namespace txbench::emu {

/// Options for the batch Monte-Carlo round engine.
struct BatchOptions {
  uint64_t seed = 1;
  bool parallel = true;          // OpenMP across rounds
  double round_spacing_s = 30.0; // experiment-time distance between rounds
};

/// Runs `n_rounds` independent rounds of one protocol over the given link
/// profiles. Emulated legs share no state, so every leg gets its own
/// single-link world anchored at the round's scheduled time; all legs of a
/// round observe the identical start instant (zero skew) and RNG streams are
/// derived per (seed, round, leg). Results are byte-identical for a given
/// seed no matter how many threads run it, which makes this the parallel
/// counterpart the serial path (parallel=false) is checked against.
std::vector<multiaccess::Round> run_batch_rounds(
    const std::vector<LinkProfile>& profiles, Protocol protocol,
    SizeClass size_class, const TransportConfig& cfg, uint64_t n_rounds,
    const BatchOptions& opt = {});

}  // namespace txbench::emu
