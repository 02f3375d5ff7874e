// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/server.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "socket_util.hpp"
#include "txbench/persistence.hpp"
#include "txbench/wire.hpp"

namespace txbench::server {

using sockets::steady_seconds;
using sockets::detail::Fd;
using sockets::detail::make_addr;
using sockets::detail::poll_until;
using sockets::detail::set_nonblocking;

namespace {

constexpr size_t kHandshakeRecordBytes = 256;
constexpr int kHandshakeRounds = 3;

uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    return 0;
  }
  return ntohs(addr.sin_port);
}

std::string peer_string(const sockaddr_in& addr) {
  char host[INET_ADDRSTRLEN] = {0};
  ::inet_ntop(AF_INET, &addr.sin_addr, host, sizeof host);
  return std::string(host) + ":" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace

struct Server::Impl {
  ServerConfig cfg;
  Fd udp_fd, tcp_fd, secure_fd;
  uint16_t udp_port = 0, tcp_port = 0, secure_port = 0;

  std::atomic<bool> stopping{false};
  std::thread udp_thread, tcp_thread, secure_thread;
  std::vector<std::thread> workers;
  std::mutex workers_mu;

  mutable std::mutex log_mu;
  std::vector<ServerTxnLog> slog;
  size_t malformed = 0;
  std::unique_ptr<persistence::LogWriter> log_file;

  void log_txn(const ServerTxnLog& entry) {
    std::lock_guard lk(log_mu);
    slog.push_back(entry);
    if (log_file) {
      nlohmann::json j;
      j["txn_id"] = entry.txn_id;
      j["peer"] = entry.link_id;
      j["expected"] = entry.expected;
      j["received"] = entry.received;
      j["replied"] = entry.replied;
      j["premature"] = entry.premature;
      j["first_data_at_s"] = entry.first_data_at_s;
      j["last_data_at_s"] = entry.last_data_at_s;
      j["replied_at_s"] = entry.replied_at_s;
      log_file->append_line(j.dump());
    }
  }

  void log_malformed(const std::string& what) {
    std::lock_guard lk(log_mu);
    ++malformed;
    if (log_file) {
      nlohmann::json j;
      j["malformed"] = what;
      j["at_s"] = steady_seconds();
      log_file->append_line(j.dump());
    }
  }

  void udp_loop();
  void accept_loop(Fd& listener, bool secure);
  void handle_stream(int fd, sockaddr_in peer, bool secure);
  void add_worker(std::thread t) {
    std::lock_guard lk(workers_mu);
    workers.push_back(std::move(t));
  }
};

// ---------------------------------------------------------------------------
// UDP
// ---------------------------------------------------------------------------

void Server::Impl::udp_loop() {
  struct Txn {
    ServerTxnLog log;
    sockaddr_in peer{};
    bool done = false;
  };
  std::map<uint64_t, Txn> txns;

  const auto reply = [&](Txn& t) {
    t.log.replied = true;
    t.log.replied_at_s = steady_seconds();
    const auto bytes = wire::encode_reply({t.log.txn_id, t.log.received});
    ::sendto(udp_fd.fd, bytes.data(), bytes.size(), 0,
             reinterpret_cast<sockaddr*>(&t.peer), sizeof t.peer);
    log_txn(t.log);
    t.done = true;
  };

  while (!stopping.load()) {
    // Poll granularity bounded by the earliest stall deadline.
    double next_deadline = steady_seconds() + 0.1;
    for (auto& [id, t] : txns) {
      if (!t.done) {
        next_deadline = std::min(
            next_deadline, t.log.last_data_at_s + cfg.stall_timeout_s);
      }
    }
    const double wait =
        std::max(0.001, next_deadline - steady_seconds());
    pollfd p{udp_fd.fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(wait * 1000.0) + 1);

    if (rc > 0) {
      uint8_t buf[65536];
      sockaddr_in peer{};
      socklen_t plen = sizeof peer;
      const ssize_t n =
          ::recvfrom(udp_fd.fd, buf, sizeof buf, 0,
                     reinterpret_cast<sockaddr*>(&peer), &plen);
      if (n >= 0) {
        const auto h = wire::decode_datagram_header(
            std::span<const uint8_t>(buf, static_cast<size_t>(n)));
        if (!h) {
          log_malformed("short datagram");
        } else {
          auto& t = txns[h->txn_id];
          const double now = steady_seconds();
          if (t.log.txn_id == 0 && t.log.first_data_at_s == 0.0) {
            t.log.txn_id = h->txn_id;
            t.log.link_id = peer_string(peer);
            t.log.expected = h->total_size;
            t.log.first_data_at_s = now;
            t.peer = peer;
          }
          if (!t.done) {
            t.log.received +=
                static_cast<uint64_t>(n) - wire::kDatagramHeaderSize;
            t.log.last_data_at_s = now;
            if (t.log.received >= t.log.expected) reply(t);
          }
        }
      }
    }

    // Stall rule: premature reply with whatever arrived.
    const double now = steady_seconds();
    for (auto& [id, t] : txns) {
      if (!t.done && t.log.first_data_at_s > 0.0 &&
          now >= t.log.last_data_at_s + cfg.stall_timeout_s) {
        t.log.premature = true;
        reply(t);
      }
    }
    // Completed transactions linger briefly in case of duplicate datagrams.
    for (auto it = txns.begin(); it != txns.end();) {
      if (it->second.done &&
          now > it->second.log.replied_at_s + 2.0 * cfg.stall_timeout_s) {
        it = txns.erase(it);
      } else {
        ++it;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// TCP / SECURE
// ---------------------------------------------------------------------------

void Server::Impl::accept_loop(Fd& listener, bool secure) {
  while (!stopping.load()) {
    pollfd p{listener.fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, 100);
    if (rc <= 0) continue;
    sockaddr_in peer{};
    socklen_t plen = sizeof peer;
    const int conn =
        ::accept(listener.fd, reinterpret_cast<sockaddr*>(&peer), &plen);
    if (conn < 0) continue;
    add_worker(std::thread([this, conn, peer, secure] {
      handle_stream(conn, peer, secure);
    }));
  }
}

namespace {

/// Reads until `want` bytes or the stall deadline since the last byte.
/// Returns the byte count actually read; `*eof` reports a closed peer.
size_t read_with_stall(int fd, uint8_t* dst, size_t want, double stall_s,
                       bool* eof) {
  size_t got = 0;
  *eof = false;
  double last_data = steady_seconds();
  while (got < want) {
    if (!poll_until(fd, POLLIN, last_data + stall_s)) break;
    const ssize_t n = ::recv(fd, dst + got, want - got, 0);
    if (n > 0) {
      got += static_cast<size_t>(n);
      last_data = steady_seconds();
      continue;
    }
    if (n == 0) {
      *eof = true;
      break;
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
    *eof = true;
    break;
  }
  return got;
}

/// Reads an HTTP request head (through CRLFCRLF); empty string on failure.
std::string read_http_head(int fd, double stall_s, bool* eof) {
  std::string head;
  *eof = false;
  double last_data = steady_seconds();
  while (head.size() < 16384) {
    if (head.size() >= 4 &&
        head.compare(head.size() - 4, 4, "\r\n\r\n") == 0) {
      return head;
    }
    if (!poll_until(fd, POLLIN, last_data + stall_s)) return {};
    uint8_t c = 0;
    const ssize_t n = ::recv(fd, &c, 1, 0);
    if (n == 1) {
      head.push_back(static_cast<char>(c));
      last_data = steady_seconds();
      continue;
    }
    if (n == 0) {
      *eof = true;
      return {};
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
    *eof = true;
    return {};
  }
  return {};
}

uint64_t header_u64(const std::string& head, const std::string& name) {
  const auto pos = head.find(name);
  if (pos == std::string::npos) return 0;
  return std::strtoull(head.c_str() + pos + name.size(), nullptr, 10);
}

}  // namespace

void Server::Impl::handle_stream(int raw_fd, sockaddr_in peer, bool secure) {
  Fd fd(raw_fd);
  ServerTxnLog entry;
  entry.link_id = peer_string(peer);

  if (secure) {
    // Model handshake first: echo three fixed-size records.
    uint8_t record[kHandshakeRecordBytes];
    for (int i = 0; i < kHandshakeRounds; ++i) {
      bool eof = false;
      const size_t got = read_with_stall(fd.fd, record, sizeof record,
                                         cfg.stall_timeout_s, &eof);
      if (got != sizeof record) {
        log_malformed("handshake truncated");
        return;
      }
      size_t off = 0;
      while (off < sizeof record) {
        const ssize_t n = ::send(fd.fd, record + off, sizeof record - off,
                                 MSG_NOSIGNAL);
        if (n <= 0) return;
        off += static_cast<size_t>(n);
      }
    }
    // Then a plain HTTP POST whose body is the message.
    bool eof = false;
    const std::string head = read_http_head(fd.fd, cfg.stall_timeout_s, &eof);
    uint64_t expected = 0;
    uint64_t txn_id = 0;
    if (!head.empty()) {
      expected = header_u64(head, "Content-Length:");
      txn_id = header_u64(head, "X-Transaction-Id:");
    }
    if (head.empty() || expected == 0) {
      log_malformed("bad http request head");
      return;
    }
    entry.txn_id = txn_id;
    entry.expected = expected;
    entry.first_data_at_s = steady_seconds();
    std::vector<uint8_t> sink(65536);
    uint64_t received = 0;
    double last_data = steady_seconds();
    bool premature = false;
    while (received < expected) {
      if (!poll_until(fd.fd, POLLIN, last_data + cfg.stall_timeout_s)) {
        premature = true;
        break;
      }
      const ssize_t n = ::recv(
          fd.fd, sink.data(),
          std::min<uint64_t>(sink.size(), expected - received), 0);
      if (n > 0) {
        received += static_cast<uint64_t>(n);
        last_data = steady_seconds();
        continue;
      }
      if (n == 0) {
        premature = true;
        break;
      }
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
      premature = true;
      break;
    }
    entry.received = received;
    entry.last_data_at_s = last_data;
    entry.premature = premature;
    const std::string count = std::to_string(received);
    std::string resp = "HTTP/1.1 200 OK\r\nContent-Type: text/plain\r\n";
    resp += "Content-Length: " + std::to_string(count.size()) + "\r\n";
    resp += "Connection: close\r\n\r\n";
    resp += count;
    size_t off = 0;
    while (off < resp.size()) {
      const ssize_t n =
          ::send(fd.fd, resp.data() + off, resp.size() - off, MSG_NOSIGNAL);
      if (n <= 0) break;
      off += static_cast<size_t>(n);
    }
    entry.replied = true;
    entry.replied_at_s = steady_seconds();
    log_txn(entry);
  } else {
    uint8_t preamble[wire::kStreamPreambleSize];
    bool eof = false;
    const size_t got = read_with_stall(fd.fd, preamble, sizeof preamble,
                                       cfg.stall_timeout_s, &eof);
    uint64_t received = 0;
    uint64_t expected = 0;
    uint64_t txn_id = 0;
    bool premature = false;
    entry.first_data_at_s = steady_seconds();
    if (got == sizeof preamble) {
      const auto p = wire::decode_stream_preamble(preamble);
      txn_id = p->txn_id;
      expected = p->total_size;
      std::vector<uint8_t> sink(65536);
      double last_data = steady_seconds();
      while (received < expected) {
        if (!poll_until(fd.fd, POLLIN, last_data + cfg.stall_timeout_s)) {
          premature = true;
          break;
        }
        const ssize_t n = ::recv(
            fd.fd, sink.data(),
            std::min<uint64_t>(sink.size(), expected - received), 0);
        if (n > 0) {
          received += static_cast<uint64_t>(n);
          last_data = steady_seconds();
          continue;
        }
        if (n == 0) {
          premature = true;
          break;
        }
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
          continue;
        }
        premature = true;
        break;
      }
      entry.last_data_at_s = last_data;
    } else {
      // Stalled inside the preamble: reply with a zero count; the txn id is
      // unknown, so the echo carries zero as well.
      premature = true;
      entry.last_data_at_s = steady_seconds();
      if (got > 0 || !eof) log_malformed("preamble truncated");
    }
    entry.txn_id = txn_id;
    entry.expected = expected;
    entry.received = received;
    entry.premature = premature;
    const auto bytes = wire::encode_reply({txn_id, received});
    size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd.fd, bytes.data() + off, bytes.size() - off,
                               MSG_NOSIGNAL);
      if (n <= 0) break;
      off += static_cast<size_t>(n);
    }
    entry.replied = true;
    entry.replied_at_s = steady_seconds();
    log_txn(entry);
  }

  if (cfg.teardown_delay_s > 0.0) {
    std::this_thread::sleep_for(
        std::chrono::duration<double>(cfg.teardown_delay_s));
  }
}

// ---------------------------------------------------------------------------
// Lifecycle
// ---------------------------------------------------------------------------

Server::Server(ServerConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
}

Server::~Server() {
  if (impl_) stop();
}

void Server::start() {
  auto& s = *impl_;
  if (!s.cfg.log_path.empty()) {
    s.log_file =
        std::make_unique<persistence::LogWriter>(s.cfg.log_path, true);
  }

  sockaddr_in addr{};
  if (!make_addr(s.cfg.bind_host, s.cfg.udp_port, &addr)) {
    throw IoError("bad bind host: " + s.cfg.bind_host);
  }

  s.udp_fd = Fd(::socket(AF_INET, SOCK_DGRAM, 0));
  if (!s.udp_fd ||
      ::bind(s.udp_fd.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) !=
          0) {
    throw IoError("cannot bind UDP port");
  }
  s.udp_port = bound_port(s.udp_fd.fd);

  const auto open_listener = [&](uint16_t port) {
    sockaddr_in a{};
    make_addr(s.cfg.bind_host, port, &a);
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    int one = 1;
    ::setsockopt(fd.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (!fd ||
        ::bind(fd.fd, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0 ||
        ::listen(fd.fd, 64) != 0) {
      throw IoError("cannot bind TCP port");
    }
    return fd;
  };
  s.tcp_fd = open_listener(s.cfg.tcp_port);
  s.tcp_port = bound_port(s.tcp_fd.fd);
  s.secure_fd = open_listener(s.cfg.secure_port);
  s.secure_port = bound_port(s.secure_fd.fd);

  s.stopping.store(false);
  s.udp_thread = std::thread([&s] { s.udp_loop(); });
  s.tcp_thread = std::thread([&s] { s.accept_loop(s.tcp_fd, false); });
  s.secure_thread = std::thread([&s] { s.accept_loop(s.secure_fd, true); });
}

void Server::stop() {
  auto& s = *impl_;
  if (s.stopping.exchange(true)) return;
  if (s.udp_thread.joinable()) s.udp_thread.join();
  if (s.tcp_thread.joinable()) s.tcp_thread.join();
  if (s.secure_thread.joinable()) s.secure_thread.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lk(s.workers_mu);
    workers.swap(s.workers);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
  s.udp_fd.reset();
  s.tcp_fd.reset();
  s.secure_fd.reset();
}

uint16_t Server::udp_port() const { return impl_->udp_port; }
uint16_t Server::tcp_port() const { return impl_->tcp_port; }
uint16_t Server::secure_port() const { return impl_->secure_port; }

std::vector<ServerTxnLog> Server::log_snapshot() const {
  std::lock_guard lk(impl_->log_mu);
  return impl_->slog;
}

size_t Server::malformed_count() const {
  std::lock_guard lk(impl_->log_mu);
  return impl_->malformed;
}

}  // namespace txbench::server
