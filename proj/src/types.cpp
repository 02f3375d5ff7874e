// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/types.hpp"

namespace txbench {

std::optional<Protocol> protocol_from_string(std::string_view s) {
  for (Protocol p : kAllProtocols) {
    if (s == to_string(p)) return p;
  }
  if (s == "HTTPS") return Protocol::SECURE;  // accepted alias
  return std::nullopt;
}

std::optional<StatusCode> status_from_string(std::string_view s) {
  for (StatusCode c :
       {StatusCode::SUCCESS, StatusCode::CLIENT_TIMEOUT,
        StatusCode::BYTE_MISMATCH, StatusCode::LINK_DOWN, StatusCode::ERROR}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

std::optional<RadioTech> radio_tech_from_string(std::string_view s) {
  for (RadioTech t : {RadioTech::Unknown, RadioTech::LTE, RadioTech::ThreeG}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<SizeClass> size_class_from_string(std::string_view s) {
  if (s == "SMALL" || s == "small") return SizeClass::SMALL;
  if (s == "LARGE" || s == "large") return SizeClass::LARGE;
  return std::nullopt;
}

void LinkMetadata::validate() const {
  if (rsrp_dbm && (*rsrp_dbm < -150.0 || *rsrp_dbm > -40.0)) {
    throw ValidationError("rsrp out of [-150, -40] dBm");
  }
}

void TransportConfig::validate() const {
  if (!(client_timeout_s > server_stall_timeout_s &&
        server_stall_timeout_s > 0.0)) {
    throw ValidationError(
        "require client_timeout > server_stall_timeout > 0");
  }
  if (udp_payload_bytes == 0) {
    throw ValidationError("udp_payload_bytes must be > 0");
  }
  if (teardown_delay_s < 0.0) {
    throw ValidationError("teardown_delay must be >= 0");
  }
}

}  // namespace txbench
