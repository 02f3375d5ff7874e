// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "txbench/common.hpp"

namespace txbench {

enum class Protocol { UDP, TCP, SECURE };

constexpr const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::UDP:
      return "UDP";
    case Protocol::TCP:
      return "TCP";
    case Protocol::SECURE:
      return "SECURE";
  }
  return "UDP";
}

std::optional<Protocol> protocol_from_string(std::string_view s);

constexpr Protocol kAllProtocols[] = {Protocol::UDP, Protocol::TCP,
                                      Protocol::SECURE};

enum class StatusCode {
  SUCCESS,
  CLIENT_TIMEOUT,
  BYTE_MISMATCH,
  LINK_DOWN,
  ERROR,
};

constexpr const char* to_string(StatusCode s) {
  switch (s) {
    case StatusCode::SUCCESS:
      return "SUCCESS";
    case StatusCode::CLIENT_TIMEOUT:
      return "CLIENT_TIMEOUT";
    case StatusCode::BYTE_MISMATCH:
      return "BYTE_MISMATCH";
    case StatusCode::LINK_DOWN:
      return "LINK_DOWN";
    case StatusCode::ERROR:
      return "ERROR";
  }
  return "ERROR";
}

std::optional<StatusCode> status_from_string(std::string_view s);

enum class RadioTech { Unknown, LTE, ThreeG };

constexpr const char* to_string(RadioTech t) {
  switch (t) {
    case RadioTech::LTE:
      return "LTE";
    case RadioTech::ThreeG:
      return "3G";
    case RadioTech::Unknown:
      return "unknown";
  }
  return "unknown";
}

std::optional<RadioTech> radio_tech_from_string(std::string_view s);

enum class SizeClass { SMALL, LARGE };

/// SMALL is the 5.6 KB warning message, LARGE the 50 KB variant.
constexpr uint64_t message_size(SizeClass c) {
  return c == SizeClass::SMALL ? 5600u : 51200u;
}

constexpr const char* to_string(SizeClass c) {
  return c == SizeClass::SMALL ? "SMALL" : "LARGE";
}

std::optional<SizeClass> size_class_from_string(std::string_view s);

/// Snapshot of link state taken just before a transaction starts.
/// Absent fields stay absent; nothing is fabricated.
struct LinkMetadata {
  std::string link_id;
  std::optional<double> rsrp_dbm;
  std::optional<double> rssi_dbm;
  RadioTech radio_tech = RadioTech::Unknown;
  std::optional<double> latitude;
  std::optional<double> longitude;
  uint64_t sampled_at_ms = 0;

  void validate() const;  // rsrp, when present, must lie in [-150, -40] dBm
};

/// Client-side protocol timing knobs. Defaults follow the measurement
/// campaign this toolkit reproduces: 6 s client time-out, 5 s server stall.
struct TransportConfig {
  double client_timeout_s = 6.0;
  double server_stall_timeout_s = 5.0;
  uint32_t udp_payload_bytes = 1400;  // per-datagram payload, header excluded
  double teardown_delay_s = 0.0;      // injected after the timer stops
  void validate() const;
};

/// Server-side view of one upload, written by both the real server and the
/// emulated model server.
struct ServerTxnLog {
  uint64_t txn_id = 0;
  std::string link_id;  // empty when the server cannot attribute the peer
  uint64_t expected = 0;
  uint64_t received = 0;
  bool replied = false;
  bool premature = false;
  double first_data_at_s = 0.0;
  double last_data_at_s = 0.0;
  double replied_at_s = 0.0;
};

/// One attempted upload on one link.
struct TransactionRecord {
  Protocol protocol = Protocol::UDP;
  std::string link_id;
  uint64_t txn_id = 0;
  double start_mono_s = 0.0;   // monotonic within the backing clock domain
  uint64_t start_wall_ms = 0;  // wall clock (synthetic epoch in virtual time)
  double duration_s = 0.0;
  StatusCode status = StatusCode::ERROR;
  std::string status_detail;
  uint64_t bytes_sent = 0;
  uint64_t bytes_acked = 0;
  LinkMetadata meta;

  bool success() const { return status == StatusCode::SUCCESS; }
};

}  // namespace txbench
