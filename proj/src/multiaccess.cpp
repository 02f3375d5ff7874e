// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/multiaccess.hpp"

#include <algorithm>

#include "txbench/transport.hpp"

namespace txbench::multiaccess {

double compute_skew(const std::vector<TransactionRecord>& legs) {
  if (legs.size() < 2) return 0.0;
  double lo = legs.front().start_mono_s;
  double hi = lo;
  for (const auto& l : legs) {
    lo = std::min(lo, l.start_mono_s);
    hi = std::max(hi, l.start_mono_s);
  }
  return hi - lo;
}

Round run_round(net::LegRunner& runner,
                const std::vector<net::LinkEndpoint*>& links,
                const message::WarningMessage& msg, const TransportConfig& cfg,
                Protocol protocol, uint64_t round_index, uint64_t txn_id_base,
                const std::vector<double>* leg_start_delays) {
  if (links.empty()) throw ValidationError("run_round needs at least one link");

  Round round;
  round.round_index = round_index;
  round.protocol = protocol;
  round.scheduled_at_s = runner.now();
  round.legs.resize(links.size());

  std::vector<std::function<void()>> legs;
  legs.reserve(links.size());
  for (size_t i = 0; i < links.size(); ++i) {
    legs.push_back([&, i] {
      net::LinkEndpoint& ep = *links[i];
      const double delay =
          leg_start_delays && i < leg_start_delays->size()
              ? (*leg_start_delays)[i]
              : 0.0;
      if (delay > 0.0) ep.sleep_until(round.scheduled_at_s + delay);
      auto meta = ep.sample_metadata();  // just before the leg starts
      auto rec = transport::transact(protocol, ep, msg, cfg,
                                     txn_id_base + static_cast<uint64_t>(i));
      rec.meta = std::move(meta);
      round.legs[i] = std::move(rec);
    });
  }
  runner.run_concurrently(std::move(legs));
  round.start_skew_s = compute_skew(round.legs);
  return round;
}

TransactionRecord best_of(const Round& round, double client_timeout_s) {
  const TransactionRecord* best = nullptr;
  for (const auto& leg : round.legs) {
    if (!leg.success()) continue;
    if (!best || leg.duration_s < best->duration_s ||
        (leg.duration_s == best->duration_s && leg.link_id < best->link_id)) {
      best = &leg;
    }
  }
  TransactionRecord ma;
  if (best) {
    ma = *best;
    ma.link_id = kMultiAccessLinkId;
    return ma;
  }
  // No leg made it: a failed multi-access attempt at the timeout.
  ma.protocol = round.protocol;
  ma.link_id = kMultiAccessLinkId;
  ma.status = StatusCode::CLIENT_TIMEOUT;
  ma.status_detail = "no successful leg";
  ma.duration_s = client_timeout_s;
  if (!round.legs.empty()) {
    ma.start_mono_s = round.legs.front().start_mono_s;
    ma.start_wall_ms = round.legs.front().start_wall_ms;
    ma.bytes_sent = round.legs.front().bytes_sent;
  }
  return ma;
}

}  // namespace txbench::multiaccess
