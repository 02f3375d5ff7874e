// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include "txbench/message.hpp"
#include "txbench/net.hpp"
#include "txbench/types.hpp"

namespace txbench::transport {

// The three upload-and-acknowledge transaction protocols. Shared timing
// contract:
//   - the timer starts when the first byte is handed to the link (UDP) or at
//     connection initiation (TCP / SECURE), and stops at reply receipt;
//   - connection teardown happens after the timer stopped and never counts;
//   - CLIENT_TIMEOUT records duration equal to the configured timeout;
//   - SUCCESS iff the reply arrived in time and acknowledges exactly the
//     bytes sent.

TransactionRecord udp_transact(net::LinkEndpoint& ep,
                               const message::WarningMessage& msg,
                               const TransportConfig& cfg, uint64_t txn_id);

TransactionRecord tcp_transact(net::LinkEndpoint& ep,
                               const message::WarningMessage& msg,
                               const TransportConfig& cfg, uint64_t txn_id);

TransactionRecord secure_transact(net::LinkEndpoint& ep,
                                  const message::WarningMessage& msg,
                                  const TransportConfig& cfg, uint64_t txn_id);

/// Dispatch by protocol enum.
TransactionRecord transact(Protocol proto, net::LinkEndpoint& ep,
                           const message::WarningMessage& msg,
                           const TransportConfig& cfg, uint64_t txn_id);

}  // namespace txbench::transport
