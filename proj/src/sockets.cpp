// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/sockets.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "socket_util.hpp"

namespace txbench::sockets {

using detail::Fd;
using detail::make_addr;
using detail::poll_until;
using detail::set_nonblocking;

namespace {

constexpr size_t kHandshakeRecordBytes = 256;
constexpr int kHandshakeRounds = 3;

std::chrono::steady_clock::time_point process_epoch() {
  static const auto t0 = std::chrono::steady_clock::now();
  return t0;
}

// Touch the epoch at static-init time so all threads agree on the base.
const auto kEpochInit = process_epoch();

}  // namespace

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       process_epoch())
      .count();
}

uint64_t system_wall_ms() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
}

namespace {

class RealDatagramChannel final : public net::DatagramChannel {
 public:
  explicit RealDatagramChannel(Fd fd) : fd_(std::move(fd)) {}

  bool send(std::span<const uint8_t> datagram) override {
    const ssize_t n = ::send(fd_.fd, datagram.data(), datagram.size(), 0);
    return n == static_cast<ssize_t>(datagram.size());
  }

  std::optional<std::vector<uint8_t>> recv(double deadline_s) override {
    for (;;) {
      if (!poll_until(fd_.fd, POLLIN, deadline_s)) return std::nullopt;
      uint8_t buf[65536];
      const ssize_t n = ::recv(fd_.fd, buf, sizeof buf, 0);
      if (n > 0) return std::vector<uint8_t>(buf, buf + n);
      if (n < 0 && (errno == EAGAIN || errno == EINTR)) continue;
      return std::nullopt;
    }
  }

 private:
  Fd fd_;
};

class RealStreamChannel final : public net::StreamChannel {
 public:
  explicit RealStreamChannel(Fd fd) : fd_(std::move(fd)) {}

  net::StreamIoResult write_all(std::span<const uint8_t> data,
                                double deadline_s) override {
    size_t off = 0;
    while (off < data.size()) {
      if (!poll_until(fd_.fd, POLLOUT, deadline_s)) {
        return net::StreamIoResult::Timeout;
      }
      const ssize_t n = ::send(fd_.fd, data.data() + off, data.size() - off,
                               MSG_NOSIGNAL);
      if (n > 0) {
        off += static_cast<size_t>(n);
        continue;
      }
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
        continue;
      }
      return net::StreamIoResult::Closed;
    }
    return net::StreamIoResult::Ok;
  }

  net::StreamIoResult read_exact(uint8_t* dst, size_t n,
                                 double deadline_s) override {
    size_t got = 0;
    while (got < n) {
      if (!poll_until(fd_.fd, POLLIN, deadline_s)) {
        return net::StreamIoResult::Timeout;
      }
      const ssize_t r = ::recv(fd_.fd, dst + got, n - got, 0);
      if (r > 0) {
        got += static_cast<size_t>(r);
        continue;
      }
      if (r == 0) return net::StreamIoResult::Closed;
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
      return net::StreamIoResult::Closed;
    }
    return net::StreamIoResult::Ok;
  }

  void close(double teardown_delay_s) override {
    if (fd_.fd < 0) return;
    if (teardown_delay_s > 0.0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(teardown_delay_s));
    }
    fd_.reset();
  }

 private:
  Fd fd_;
};

Fd open_udp_socket(const ServerAddress& server, const std::string& bind_ip) {
  Fd fd(::socket(AF_INET, SOCK_DGRAM, 0));
  if (!fd) return {};
  if (!bind_ip.empty()) {
    sockaddr_in local{};
    if (!make_addr(bind_ip, 0, &local) ||
        ::bind(fd.fd, reinterpret_cast<sockaddr*>(&local), sizeof local) != 0) {
      return {};
    }
  }
  sockaddr_in addr{};
  if (!make_addr(server.host, server.udp_port, &addr)) return {};
  if (::connect(fd.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    return {};
  }
  return fd;
}

}  // namespace

RealEndpoint::RealEndpoint(std::string link_id, ServerAddress server,
                           std::string bind_ip,
                           std::optional<LinkMetadata> static_metadata)
    : link_id_(std::move(link_id)),
      server_(std::move(server)),
      bind_ip_(std::move(bind_ip)),
      static_meta_(std::move(static_metadata)) {}

void RealEndpoint::sleep_until(double t_s) {
  const double remain = t_s - steady_seconds();
  if (remain > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(remain));
  }
}

std::unique_ptr<net::DatagramChannel> RealEndpoint::open_datagram() {
  auto fd = open_udp_socket(server_, bind_ip_);
  if (!fd) return nullptr;
  return std::make_unique<RealDatagramChannel>(std::move(fd));
}

net::StreamOpenResult RealEndpoint::open_stream(net::SecureMode mode,
                                                double deadline_s) {
  net::StreamOpenResult res;
  const bool secure = mode == net::SecureMode::ModelHandshake;
  const uint16_t port = secure ? server_.secure_port : server_.tcp_port;

  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd) {
    res.fail_status = StatusCode::LINK_DOWN;
    res.fail_detail = "socket creation failed";
    return res;
  }
  if (!bind_ip_.empty()) {
    sockaddr_in local{};
    if (!make_addr(bind_ip_, 0, &local) ||
        ::bind(fd.fd, reinterpret_cast<sockaddr*>(&local), sizeof local) != 0) {
      res.fail_status = StatusCode::LINK_DOWN;
      res.fail_detail = "bind failed";
      return res;
    }
  }
  set_nonblocking(fd.fd);
  sockaddr_in addr{};
  if (!make_addr(server_.host, port, &addr)) {
    res.fail_status = StatusCode::LINK_DOWN;
    res.fail_detail = "bad server address";
    return res;
  }
  const int rc = ::connect(fd.fd, reinterpret_cast<sockaddr*>(&addr),
                           sizeof addr);
  if (rc != 0 && errno != EINPROGRESS) {
    res.fail_status = StatusCode::LINK_DOWN;
    res.fail_detail = "connect failed";
    return res;
  }
  if (rc != 0) {
    if (!poll_until(fd.fd, POLLOUT, deadline_s)) {
      res.fail_status = StatusCode::CLIENT_TIMEOUT;
      res.fail_detail = "connect timed out";
      return res;
    }
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(fd.fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      res.fail_status = StatusCode::LINK_DOWN;
      res.fail_detail = "connect failed: " + std::string(strerror(err));
      return res;
    }
  }
  int one = 1;
  ::setsockopt(fd.fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  auto chan = std::make_unique<RealStreamChannel>(std::move(fd));
  if (secure) {
    // Stand-in for the TLS exchange: three application-level round trips of
    // fixed-size records before any data.
    uint8_t record[kHandshakeRecordBytes];
    for (int i = 0; i < kHandshakeRounds; ++i) {
      std::memset(record, 0, sizeof record);
      std::memcpy(record, "TXHS", 4);
      record[4] = static_cast<uint8_t>(i);
      const auto wr = chan->write_all(record, deadline_s);
      if (wr != net::StreamIoResult::Ok) {
        res.fail_status = wr == net::StreamIoResult::Timeout
                              ? StatusCode::CLIENT_TIMEOUT
                              : StatusCode::ERROR;
        res.fail_detail = "handshake send failed";
        return res;
      }
      const auto rd = chan->read_exact(record, sizeof record, deadline_s);
      if (rd == net::StreamIoResult::Timeout) {
        res.fail_status = StatusCode::CLIENT_TIMEOUT;
        res.fail_detail = "handshake timed out";
        return res;
      }
      if (rd == net::StreamIoResult::Closed) {
        res.fail_status = StatusCode::ERROR;
        res.fail_detail = "handshake rejected";
        return res;
      }
    }
  }
  res.channel = std::move(chan);
  return res;
}

LinkMetadata RealEndpoint::sample_metadata() {
  LinkMetadata m;
  if (static_meta_) m = *static_meta_;
  m.link_id = link_id_;
  m.sampled_at_ms = system_wall_ms();
  return m;
}

LinkMetadata load_metadata_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metadata file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metadata JSON error: ") + e.what());
  }
  LinkMetadata m;
  m.link_id = j.value("link_id", std::string{});
  if (j.contains("rsrp_dbm")) m.rsrp_dbm = j["rsrp_dbm"].get<double>();
  if (j.contains("rssi_dbm")) m.rssi_dbm = j["rssi_dbm"].get<double>();
  if (j.contains("radio_tech")) {
    const auto rt = radio_tech_from_string(j["radio_tech"].get<std::string>());
    if (rt) m.radio_tech = *rt;
  }
  if (j.contains("latitude")) m.latitude = j["latitude"].get<double>();
  if (j.contains("longitude")) m.longitude = j["longitude"].get<double>();
  m.validate();
  return m;
}

void RealLegRunner::sleep_until(double t_s) {
  const double remain = t_s - steady_seconds();
  if (remain > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(remain));
  }
}

void RealLegRunner::run_concurrently(std::vector<std::function<void()>> legs) {
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(legs.size());
  for (auto& leg : legs) {
    threads.emplace_back([&, fn = std::move(leg)] {
      try {
        fn();
      } catch (...) {
        std::lock_guard lk(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace txbench::sockets
