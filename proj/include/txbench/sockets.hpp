// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <optional>
#include <string>

#include "txbench/net.hpp"
#include "txbench/types.hpp"

namespace txbench::sockets {

/// Where the upload server listens. UDP and TCP share a port number by
/// convention; SECURE has its own.
struct ServerAddress {
  std::string host = "127.0.0.1";
  uint16_t udp_port = 0;
  uint16_t tcp_port = 0;
  uint16_t secure_port = 0;
};

/// Seconds since process start on the monotonic clock; the shared time base
/// of all real endpoints.
double steady_seconds();
uint64_t system_wall_ms();

/// A real link: sockets to the server, optionally bound to a local address
/// (one per operator interface) and wired to a static metadata source.
class RealEndpoint : public net::LinkEndpoint {
 public:
  RealEndpoint(std::string link_id, ServerAddress server,
               std::string bind_ip = {},
               std::optional<LinkMetadata> static_metadata = std::nullopt);

  const std::string& link_id() const override { return link_id_; }
  double now() const override { return steady_seconds(); }
  uint64_t wall_ms() const override { return system_wall_ms(); }
  void sleep_until(double t_s) override;

  std::unique_ptr<net::DatagramChannel> open_datagram() override;
  net::StreamOpenResult open_stream(net::SecureMode mode,
                                    double deadline_s) override;
  bool secure_uses_http() const override { return true; }
  LinkMetadata sample_metadata() override;

 private:
  std::string link_id_;
  ServerAddress server_;
  std::string bind_ip_;
  std::optional<LinkMetadata> static_meta_;
};

/// Loads a static metadata snapshot (JSON object with the LinkMetadata
/// fields) to attach to a real link.
LinkMetadata load_metadata_file(const std::string& path);

/// Plain thread-per-leg execution against the wall clock.
class RealLegRunner : public net::LegRunner {
 public:
  double now() const override { return steady_seconds(); }
  uint64_t wall_ms() const override { return system_wall_ms(); }
  void sleep_until(double t_s) override;
  void run_concurrently(std::vector<std::function<void()>> legs) override;
};

}  // namespace txbench::sockets
