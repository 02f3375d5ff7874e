// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "txbench/types.hpp"

namespace txbench::server {

struct ServerConfig {
  std::string bind_host = "127.0.0.1";
  uint16_t udp_port = 0;     // 0 picks an ephemeral port
  uint16_t tcp_port = 0;     // UDP and TCP conventionally share a number
  uint16_t secure_port = 0;  // the SECURE (HTTP) listener
  double stall_timeout_s = 5.0;
  double teardown_delay_s = 0.0;  // injected before server-side close
  std::string log_path;           // optional JSONL transaction log
};

/// The upload server: learns each transaction's expected size from its
/// header, replies with the received byte count the moment everything
/// arrived, and replies prematurely with the partial count after the stall
/// timeout. Runs until stopped.
class Server {
 public:
  explicit Server(ServerConfig cfg);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();

  uint16_t udp_port() const;
  uint16_t tcp_port() const;
  uint16_t secure_port() const;

  std::vector<ServerTxnLog> log_snapshot() const;
  size_t malformed_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace txbench::server
