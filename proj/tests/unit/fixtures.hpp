// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <string>
#include <vector>

#include "txbench/emulator.hpp"
#include "txbench/persistence.hpp"

namespace fixtures {

/// Seeded synthetic log records shaped like a small campaign: three links,
/// mixed successes and failures, RSRP attached. Deterministic per seed.
inline std::vector<txbench::persistence::LogRecord> make_records(
    uint64_t seed, size_t n, double success_rate = 0.9) {
  txbench::emu::Rng rng(seed);
  std::vector<txbench::persistence::LogRecord> out(n);
  for (size_t i = 0; i < n; ++i) {
    auto& rec = out[i];
    rec.round_index = i / 3;
    rec.start_skew_s = 0.0;
    rec.size_class = txbench::SizeClass::SMALL;
    auto& t = rec.txn;
    t.protocol = txbench::Protocol::UDP;
    t.link_id = "op" + std::to_string(i % 3);
    t.txn_id = i + 1;
    t.start_mono_s = static_cast<double>(i) * 0.01;
    t.start_wall_ms = 1700000000000ull + i;
    const bool ok = rng.u01() < success_rate;
    if (ok) {
      t.status = txbench::StatusCode::SUCCESS;
      t.duration_s = 0.030 * std::exp(0.7 * rng.normal()) +
                     0.250 * (rng.u01() < 0.25 ? 1.0 : 0.0);
      t.bytes_sent = 5600;
      t.bytes_acked = 5600;
    } else {
      t.status = txbench::StatusCode::CLIENT_TIMEOUT;
      t.duration_s = 6.0;
      t.bytes_sent = 5600;
      t.bytes_acked = 0;
    }
    t.meta.link_id = t.link_id;
    t.meta.radio_tech = txbench::RadioTech::LTE;
    t.meta.rsrp_dbm = -130.0 + 70.0 * rng.u01();
    t.meta.sampled_at_ms = t.start_wall_ms;
  }
  return out;
}

}  // namespace fixtures
