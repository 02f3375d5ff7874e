// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <vector>

#include "txbench/message.hpp"
#include "txbench/net.hpp"
#include "txbench/types.hpp"

namespace txbench::multiaccess {

/// Synthetic link id carried by best-of-round records.
inline constexpr const char* kMultiAccessLinkId = "MA";

/// One protocol's synchronized group of per-link transactions.
struct Round {
  uint64_t round_index = 0;
  Protocol protocol = Protocol::UDP;
  double scheduled_at_s = 0.0;
  std::vector<TransactionRecord> legs;  // one per link, link order
  double start_skew_s = 0.0;            // max pairwise leg start difference
};

double compute_skew(const std::vector<TransactionRecord>& legs);

/// Duplicates the transaction over every link as simultaneously as the
/// backend allows, waits for all legs, and returns the assembled round.
/// `leg_start_delays`, when given, shifts individual leg starts (the skew
/// injection knob used to exercise the synchronization filter).
Round run_round(net::LegRunner& runner,
                const std::vector<net::LinkEndpoint*>& links,
                const message::WarningMessage& msg, const TransportConfig& cfg,
                Protocol protocol, uint64_t round_index, uint64_t txn_id_base,
                const std::vector<double>* leg_start_delays = nullptr);

/// The multi-access result: the fastest successful leg relabeled "MA", ties
/// broken by lowest link id. With no successful leg, a failed record at the
/// client timeout.
TransactionRecord best_of(const Round& round, double client_timeout_s = 6.0);

}  // namespace txbench::multiaccess
