// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "txbench/types.hpp"

namespace txbench::net {

/// Connectionless channel to the server (one UDP socket or one emulated
/// datagram flow).
class DatagramChannel {
 public:
  virtual ~DatagramChannel() = default;
  /// Hands one datagram to the link. Returns false when the link is down.
  virtual bool send(std::span<const uint8_t> datagram) = 0;
  /// Waits for the next inbound datagram until `deadline` (endpoint-monotonic
  /// seconds). nullopt on deadline.
  virtual std::optional<std::vector<uint8_t>> recv(double deadline_s) = 0;
};

enum class StreamIoResult { Ok, Timeout, Closed };

/// Established byte stream to the server. Real backend: a connected TCP
/// socket. Emulated backend: a modeled stream (handshake, windowed transfer)
/// over the emulated link.
class StreamChannel {
 public:
  virtual ~StreamChannel() = default;
  virtual StreamIoResult write_all(std::span<const uint8_t> data,
                                   double deadline_s) = 0;
  virtual StreamIoResult read_exact(uint8_t* dst, size_t n,
                                    double deadline_s) = 0;
  /// Tears the connection down. `teardown_delay_s` is injected before the
  /// close completes; transaction timers must already be stopped.
  virtual void close(double teardown_delay_s) = 0;
};

enum class SecureMode { None, ModelHandshake };

struct StreamOpenResult {
  std::unique_ptr<StreamChannel> channel;  // null on failure
  StatusCode fail_status = StatusCode::ERROR;
  std::string fail_detail;
};

/// One attachment point to one link (operator). Implementations: real
/// sockets bound to an interface, or an emulated link in a World.
class LinkEndpoint {
 public:
  virtual ~LinkEndpoint() = default;

  virtual const std::string& link_id() const = 0;

  /// Monotonic seconds in this endpoint's clock domain.
  virtual double now() const = 0;
  virtual uint64_t wall_ms() const = 0;
  virtual void sleep_until(double t_s) = 0;

  /// Opens a datagram channel; null when the link is administratively down.
  virtual std::unique_ptr<DatagramChannel> open_datagram() = 0;

  /// Establishes a stream (handshake included for SecureMode::ModelHandshake),
  /// bounded by `deadline`.
  virtual StreamOpenResult open_stream(SecureMode mode, double deadline_s) = 0;

  /// True when SECURE transactions on this endpoint speak HTTP (real backend).
  virtual bool secure_uses_http() const { return false; }

  /// Link state snapshot for the metadata log; fields the source cannot
  /// provide stay absent.
  virtual LinkMetadata sample_metadata() = 0;
};

/// Backend-specific execution of concurrent round legs plus the clock the
/// scheduler paces rounds with.
class LegRunner {
 public:
  virtual ~LegRunner() = default;
  virtual double now() const = 0;
  virtual uint64_t wall_ms() const = 0;
  virtual void sleep_until(double t_s) = 0;
  /// Runs all legs concurrently; returns when every leg finished.
  virtual void run_concurrently(std::vector<std::function<void()>> legs) = 0;
};

}  // namespace txbench::net
