// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include <algorithm>
#include <atomic>
#include <cstdarg>
#include <cstdio>
#include <latch>
#include <limits>
#include <thread>

#include "txbench/emulator.hpp"
#include "txbench/wire.hpp"

namespace txbench::emu {

namespace {

// Stream model constants. Only round-trip structure matters for timing
// fidelity, so control records carry nominal sizes.
constexpr size_t kSynBytes = 64;
constexpr size_t kHsRecordBytes = 256;
constexpr size_t kStreamAckBytes = 64;
constexpr double kSynRto_s = 1.0;
constexpr double kDataRto_s = 0.2;
constexpr int kSecureHandshakeRounds = 3;
constexpr size_t kInitialWindowBytes = 14000;  // ten full segments

enum class MsgKind : uint8_t { UdpReply, SynAck, HsReply, StreamAck, StreamReply };

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::UdpReply:
      return "udp_reply";
    case MsgKind::SynAck:
      return "syn_ack";
    case MsgKind::HsReply:
      return "hs_reply";
    case MsgKind::StreamAck:
      return "stream_ack";
    case MsgKind::StreamReply:
      return "stream_reply";
  }
  return "?";
}

std::string fmt(const char* f, ...) {
  char buf[192];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

}  // namespace

struct Network::Link {
  LinkProfile profile;
  Rng rng;
  Rng meta_rng;
  uint32_t index = 0;
  bool admin_up = true;
  uint64_t packets = 0;        // all sends, for event tie keys
  uint64_t data_ordinal = 0;   // uplink data packets, for scripted drops
  int last_component = -1;

  struct Msg {
    MsgKind kind;
    uint64_t conn;  // conn id for streams, txn id for UDP replies
    uint64_t value;
    std::vector<uint8_t> bytes;
  };
  std::deque<Msg> inbox;
  // Realtime mode: wakes exactly this link's waiting channel.
  std::condition_variable_any cv;
  std::vector<std::string> send_trace;
  std::unique_ptr<net::LinkEndpoint> endpoint;

  Link(LinkProfile p, uint32_t idx)
      : profile(std::move(p)),
        rng(profile.rng_seed),
        meta_rng(derive_seed(profile.rng_seed, 0x4d455441u)),
        index(idx) {}
};

struct Network::Impl {
  TransportConfig cfg;
  std::vector<std::unique_ptr<Link>> links;

  struct UdpTxn {
    uint64_t txn = 0;
    Link* via = nullptr;
    uint64_t expected = 0;
    uint64_t received = 0;
    double first_at = 0.0, last_at = 0.0;
    bool replied = false, premature = false, stall_armed = false;
  };
  std::map<uint64_t, UdpTxn> udp;

  struct Conn {
    uint64_t conn_id = 0;
    Link* via = nullptr;
    bool secure = false;
    std::map<uint64_t, uint64_t> ranges;  // merged [begin, end) stream offsets
    uint64_t contiguous = 0;
    std::vector<uint8_t> head;  // first stream bytes, for the preamble
    std::optional<uint64_t> expected_stream;
    uint64_t preamble_txn = 0;
    double first_at = 0.0, last_at = 0.0;
    bool replied = false, premature = false, stall_armed = false;
  };
  std::map<uint64_t, Conn> conns;
  uint64_t next_conn = 1;
  uint64_t timer_seq = 0;

  std::vector<ServerTxnLog> slog;
  size_t malformed = 0;
  bool trace_on = false;
  std::vector<std::string> event_trace;
};

namespace {

// ---------------------------------------------------------------------------
// Client-side channels. All shared state is guarded by the world lock; wait
// predicates run under it by contract.
// ---------------------------------------------------------------------------

class EmuDatagramChannel final : public net::DatagramChannel {
 public:
  EmuDatagramChannel(Network& net, World& w, Network::Link& link,
                     Network::Impl& impl)
      : net_(net), world_(w), link_(link), impl_(impl) {}

  bool send(std::span<const uint8_t> datagram) override;
  std::optional<std::vector<uint8_t>> recv(double deadline_s) override;

 private:
  Network& net_;
  World& world_;
  Network::Link& link_;
  Network::Impl& impl_;
};

class EmuStreamChannel final : public net::StreamChannel {
 public:
  EmuStreamChannel(Network& net, World& w, Network::Link& link,
                   Network::Impl& impl, uint64_t conn_id)
      : net_(net), world_(w), link_(link), impl_(impl), conn_id_(conn_id) {}

  net::StreamIoResult write_all(std::span<const uint8_t> data,
                                double deadline_s) override;
  net::StreamIoResult read_exact(uint8_t* dst, size_t n,
                                 double deadline_s) override;
  void close(double teardown_delay_s) override;

  // connection setup, driven by EmuEndpoint::open_stream
  void send_syn(bool secure);
  void send_hs(int idx);
  void pump_inbox();  // lock held

  bool synacked_ = false;
  int hs_done_ = 0;
  uint64_t acked_ = 0;
  std::optional<std::vector<uint8_t>> reply_;

 private:
  void send_burst(std::span<const uint8_t> data, size_t begin, size_t end);

  Network& net_;
  World& world_;
  Network::Link& link_;
  Network::Impl& impl_;
  uint64_t conn_id_;
  bool closed_ = false;
};

class EmuEndpoint final : public net::LinkEndpoint {
 public:
  EmuEndpoint(Network& net, World& w, Network::Link& link, Network::Impl& impl)
      : net_(net), world_(w), link_(link), impl_(impl) {}

  const std::string& link_id() const override { return link_.profile.link_id; }
  double now() const override { return world_.now(); }
  uint64_t wall_ms() const override { return world_.wall_ms(); }
  void sleep_until(double t_s) override { world_.sleep_until(t_s); }

  std::unique_ptr<net::DatagramChannel> open_datagram() override;
  net::StreamOpenResult open_stream(net::SecureMode mode,
                                    double deadline_s) override;
  LinkMetadata sample_metadata() override;

 private:
  Network& net_;
  World& world_;
  Network::Link& link_;
  Network::Impl& impl_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Link-layer send helpers and the model server (free functions on Impl state;
// everything below assumes the world lock is held).
// ---------------------------------------------------------------------------

namespace {

uint64_t packet_tie_key(const Network::Link& l, uint64_t packet) {
  return (uint64_t(l.index + 1) << 40) | packet;
}

uint64_t timer_tie_key(uint64_t seq) { return (0xFFull << 56) | seq; }

void trace_send(Network::Impl& impl, Network::Link& l, const char* what,
                double at, const TransmitOutcome& out) {
  if (!impl.trace_on) return;
  if (out.delivered) {
    l.send_trace.push_back(fmt("%s t=%.9f %s -> %.9f", l.profile.link_id.c_str(),
                               at, what, out.deliver_at_s));
  } else {
    l.send_trace.push_back(
        fmt("%s t=%.9f %s drop", l.profile.link_id.c_str(), at, what));
  }
}

void trace_event(Network::Impl& impl, double at, const std::string& line) {
  if (!impl.trace_on) return;
  impl.event_trace.push_back(fmt("t=%.9f %s", at, line.c_str()));
}

void deliver_to_client(World& w, Network::Impl& impl, Network::Link& l,
                       Network::Link::Msg msg, size_t bytes_on_wire,
                       bool is_data) {
  const double at = w.now();
  l.packets++;
  if (is_data) l.data_ordinal++;
  const auto out = transmit(l.profile, l.rng, is_data ? l.data_ordinal : 0,
                            bytes_on_wire, at);
  l.last_component = static_cast<int>(out.component);
  trace_send(impl, l, kind_name(msg.kind), at, out);
  if (!out.delivered) return;
  w.schedule(out.deliver_at_s, packet_tie_key(l, l.packets),
             [&w, &impl, &l, m = std::move(msg)]() mutable {
               trace_event(impl, w.now(),
                           fmt("%s deliver %s", l.profile.link_id.c_str(),
                               kind_name(m.kind)));
               l.inbox.push_back(std::move(m));
               l.cv.notify_all();
             });
}

void server_reply_udp(World& w, Network::Impl& impl, Network::Impl::UdpTxn& t) {
  t.replied = true;
  ServerTxnLog log;
  log.txn_id = t.txn;
  log.link_id = t.via->profile.link_id;
  log.expected = t.expected;
  log.received = t.received;
  log.replied = true;
  log.premature = t.premature;
  log.first_data_at_s = t.first_at;
  log.last_data_at_s = t.last_at;
  log.replied_at_s = w.now();
  impl.slog.push_back(log);
  auto bytes = wire::encode_reply({t.txn, t.received});
  deliver_to_client(w, impl, *t.via,
                    {MsgKind::UdpReply, t.txn, t.received, std::move(bytes)},
                    wire::kReplySize, false);
}

void arm_udp_stall(World& w, Network::Impl& impl, uint64_t txn);

void udp_stall_fire(World& w, Network::Impl& impl, uint64_t txn) {
  auto it = impl.udp.find(txn);
  if (it == impl.udp.end()) return;
  auto& t = it->second;
  t.stall_armed = false;
  if (t.replied) return;
  const double now = w.now();
  if (now + 1e-9 >= t.last_at + impl.cfg.server_stall_timeout_s) {
    t.premature = true;
    trace_event(impl, now, fmt("server udp txn=%llu premature reply %llu/%llu",
                               (unsigned long long)t.txn,
                               (unsigned long long)t.received,
                               (unsigned long long)t.expected));
    server_reply_udp(w, impl, t);
  } else {
    arm_udp_stall(w, impl, txn);
  }
}

void arm_udp_stall(World& w, Network::Impl& impl, uint64_t txn) {
  auto& t = impl.udp.at(txn);
  if (t.stall_armed || t.replied) return;
  t.stall_armed = true;
  w.schedule(t.last_at + impl.cfg.server_stall_timeout_s,
             timer_tie_key(impl.timer_seq++),
             [&w, &impl, txn] { udp_stall_fire(w, impl, txn); });
}

void server_on_udp_datagram(World& w, Network::Impl& impl, Network::Link& l,
                            const std::vector<uint8_t>& bytes) {
  const auto h = wire::decode_datagram_header(bytes);
  if (!h) {
    impl.malformed++;
    trace_event(impl, w.now(), "server malformed datagram");
    return;
  }
  auto& t = impl.udp[h->txn_id];
  if (t.via == nullptr) {
    t.txn = h->txn_id;
    t.via = &l;
    t.expected = h->total_size;
    t.first_at = w.now();
  }
  t.received += bytes.size() - wire::kDatagramHeaderSize;
  t.last_at = w.now();
  if (!t.replied && t.received >= t.expected) {
    server_reply_udp(w, impl, t);
  } else if (!t.replied) {
    arm_udp_stall(w, impl, t.txn);
  }
}

void server_reply_stream(World& w, Network::Impl& impl,
                         Network::Impl::Conn& c) {
  c.replied = true;
  const uint64_t payload =
      c.contiguous > wire::kStreamPreambleSize
          ? c.contiguous - wire::kStreamPreambleSize
          : 0;
  ServerTxnLog log;
  log.txn_id = c.preamble_txn;
  log.link_id = c.via->profile.link_id;
  log.expected = c.expected_stream
                     ? *c.expected_stream - wire::kStreamPreambleSize
                     : 0;
  log.received = payload;
  log.replied = true;
  log.premature = c.premature;
  log.first_data_at_s = c.first_at;
  log.last_data_at_s = c.last_at;
  log.replied_at_s = w.now();
  impl.slog.push_back(log);
  auto bytes = wire::encode_reply({c.preamble_txn, payload});
  deliver_to_client(w, impl, *c.via,
                    {MsgKind::StreamReply, c.conn_id, payload, std::move(bytes)},
                    wire::kReplySize, false);
}

void arm_stream_stall(World& w, Network::Impl& impl, uint64_t conn);

void stream_stall_fire(World& w, Network::Impl& impl, uint64_t conn) {
  auto it = impl.conns.find(conn);
  if (it == impl.conns.end()) return;
  auto& c = it->second;
  c.stall_armed = false;
  if (c.replied) return;
  const double now = w.now();
  if (c.last_at > 0.0 &&
      now + 1e-9 >= c.last_at + impl.cfg.server_stall_timeout_s) {
    c.premature = true;
    trace_event(impl, now,
                fmt("server stream conn=%llu premature reply %llu",
                    (unsigned long long)conn, (unsigned long long)c.contiguous));
    server_reply_stream(w, impl, c);
  } else {
    arm_stream_stall(w, impl, conn);
  }
}

void arm_stream_stall(World& w, Network::Impl& impl, uint64_t conn) {
  auto& c = impl.conns.at(conn);
  if (c.stall_armed || c.replied) return;
  c.stall_armed = true;
  const double base = c.last_at > 0.0 ? c.last_at : w.now();
  w.schedule(base + impl.cfg.server_stall_timeout_s,
             timer_tie_key(impl.timer_seq++),
             [&w, &impl, conn] { stream_stall_fire(w, impl, conn); });
}

void server_on_syn(World& w, Network::Impl& impl, Network::Link& l,
                   uint64_t conn_id, bool secure) {
  auto& c = impl.conns[conn_id];
  if (c.via == nullptr) {
    c.conn_id = conn_id;
    c.via = &l;
    c.secure = secure;
    // The stall clock starts at connection acceptance; a client that never
    // sends data still gets a premature (empty) reply.
    c.last_at = w.now();
    arm_stream_stall(w, impl, conn_id);
  }
  deliver_to_client(w, impl, l, {MsgKind::SynAck, conn_id, 0, {}}, kSynBytes,
                    false);
}

void server_on_hs(World& w, Network::Impl& impl, Network::Link& l,
                  uint64_t conn_id, uint64_t idx) {
  auto it = impl.conns.find(conn_id);
  if (it == impl.conns.end()) {
    impl.malformed++;
    return;
  }
  it->second.last_at = w.now();
  deliver_to_client(w, impl, l, {MsgKind::HsReply, conn_id, idx, {}},
                    kHsRecordBytes, false);
}

void add_range(Network::Impl::Conn& c, uint64_t begin, uint64_t end) {
  auto it = c.ranges.lower_bound(begin);
  if (it != c.ranges.begin()) {
    auto prev = std::prev(it);
    if (prev->second >= begin) {
      begin = prev->first;
      end = std::max(end, prev->second);
      it = prev;
    }
  }
  while (it != c.ranges.end() && it->first <= end) {
    end = std::max(end, it->second);
    it = c.ranges.erase(it);
  }
  c.ranges[begin] = end;
  c.contiguous = (!c.ranges.empty() && c.ranges.begin()->first == 0)
                     ? c.ranges.begin()->second
                     : 0;
}

void server_on_segment(World& w, Network::Impl& impl, Network::Link& l,
                       uint64_t conn_id, uint64_t offset, uint64_t len,
                       bool ack_req, std::vector<uint8_t> head) {
  auto it = impl.conns.find(conn_id);
  if (it == impl.conns.end()) {
    impl.malformed++;
    return;
  }
  auto& c = it->second;
  const double now = w.now();
  if (c.first_at == 0.0) c.first_at = now;
  c.last_at = now;
  if (c.replied) {
    if (ack_req) {
      deliver_to_client(w, impl, l, {MsgKind::StreamAck, conn_id, c.contiguous, {}},
                        kStreamAckBytes, false);
    }
    return;
  }
  if (offset == 0 && !head.empty()) c.head = std::move(head);
  add_range(c, offset, offset + len);
  if (!c.expected_stream && c.contiguous >= wire::kStreamPreambleSize &&
      c.head.size() >= wire::kStreamPreambleSize) {
    const auto p = wire::decode_stream_preamble(c.head);
    c.preamble_txn = p->txn_id;
    c.expected_stream = wire::kStreamPreambleSize + p->total_size;
  }
  if (c.expected_stream && c.contiguous >= *c.expected_stream) {
    server_reply_stream(w, impl, c);
    return;
  }
  if (ack_req) {
    deliver_to_client(w, impl, l, {MsgKind::StreamAck, conn_id, c.contiguous, {}},
                      kStreamAckBytes, false);
  }
  arm_stream_stall(w, impl, conn_id);
}

// Uplink helper: samples the link and schedules the server-side handler.
template <class Fn>
void uplink(World& w, Network::Impl& impl, Network::Link& l, const char* what,
            bool is_data, size_t bytes_on_wire, Fn&& handler) {
  const double at = w.now();
  l.packets++;
  if (is_data) l.data_ordinal++;
  const auto out = transmit(l.profile, l.rng, is_data ? l.data_ordinal : 0,
                            bytes_on_wire, at);
  l.last_component = static_cast<int>(out.component);
  trace_send(impl, l, what, at, out);
  if (!out.delivered) return;
  w.schedule(out.deliver_at_s, packet_tie_key(l, l.packets),
             std::forward<Fn>(handler));
}

}  // namespace

// ---------------------------------------------------------------------------
// Channel implementations
// ---------------------------------------------------------------------------

bool EmuDatagramChannel::send(std::span<const uint8_t> datagram) {
  return world_.run_locked([&] {
    if (!link_.admin_up) return false;
    std::vector<uint8_t> bytes(datagram.begin(), datagram.end());
    uplink(world_, impl_, link_, "udp_datagram", true, bytes.size(),
           [this, bytes = std::move(bytes)] {
             trace_event(impl_, world_.now(),
                         fmt("%s arrive udp_datagram", link_.profile.link_id.c_str()));
             server_on_udp_datagram(world_, impl_, link_, bytes);
           });
    return true;
  });
}

std::optional<std::vector<uint8_t>> EmuDatagramChannel::recv(
    double deadline_s) {
  std::optional<std::vector<uint8_t>> res;
  world_.wait_until_on(&link_.cv, deadline_s, [&] {
    for (auto it = link_.inbox.begin(); it != link_.inbox.end(); ++it) {
      if (it->kind == MsgKind::UdpReply) {
        res = std::move(it->bytes);
        link_.inbox.erase(it);
        return true;
      }
    }
    return false;
  });
  return res;
}

void EmuStreamChannel::pump_inbox() {
  for (auto it = link_.inbox.begin(); it != link_.inbox.end();) {
    if (it->conn != conn_id_ || it->kind == MsgKind::UdpReply) {
      ++it;
      continue;
    }
    switch (it->kind) {
      case MsgKind::SynAck:
        synacked_ = true;
        break;
      case MsgKind::HsReply:
        hs_done_ = std::max(hs_done_, static_cast<int>(it->value) + 1);
        break;
      case MsgKind::StreamAck:
        acked_ = std::max(acked_, it->value);
        break;
      case MsgKind::StreamReply:
        reply_ = std::move(it->bytes);
        break;
      default:
        break;
    }
    it = link_.inbox.erase(it);
  }
}

void EmuStreamChannel::send_syn(bool secure) {
  world_.run_locked([&] {
    uplink(world_, impl_, link_, "syn", false, kSynBytes,
           [this, secure] { server_on_syn(world_, impl_, link_, conn_id_, secure); });
  });
}

void EmuStreamChannel::send_hs(int idx) {
  world_.run_locked([&] {
    uplink(world_, impl_, link_, "hs_record", false, kHsRecordBytes,
           [this, idx] {
             server_on_hs(world_, impl_, link_, conn_id_,
                          static_cast<uint64_t>(idx));
           });
  });
}

void EmuStreamChannel::send_burst(std::span<const uint8_t> data, size_t begin,
                                  size_t end) {
  world_.run_locked([&] {
    const size_t seg = impl_.cfg.udp_payload_bytes;
    for (size_t off = begin; off < end; off += seg) {
      const size_t len = std::min(seg, end - off);
      const bool ack_req = off + len >= end;
      std::vector<uint8_t> head;
      if (off == 0) {
        const size_t h = std::min<size_t>(wire::kStreamPreambleSize, len);
        head.assign(data.begin(), data.begin() + h);
      }
      uplink(world_, impl_, link_, "segment", true,
             len + 8 /* nominal segment framing */,
             [this, off, len, ack_req, head = std::move(head)]() mutable {
               server_on_segment(world_, impl_, link_, conn_id_, off, len,
                                 ack_req, std::move(head));
             });
    }
  });
}

net::StreamIoResult EmuStreamChannel::write_all(std::span<const uint8_t> data,
                                                double deadline_s) {
  size_t off = 0;
  const size_t n = data.size();
  while (off < n) {
    if (world_.run_locked([&] {
          pump_inbox();
          return reply_.has_value();
        })) {
      return net::StreamIoResult::Ok;  // server already concluded this upload
    }
    const size_t burst_end = std::min(off + kInitialWindowBytes, n);
    send_burst(data, off, burst_end);
    for (;;) {
      const double rto_at = world_.now() + kDataRto_s;
      const bool got =
          world_.wait_until_on(&link_.cv, std::min(deadline_s, rto_at), [&] {
            pump_inbox();
            return acked_ >= burst_end || reply_.has_value();
          });
      if (got) break;
      if (world_.now() >= deadline_s) return net::StreamIoResult::Timeout;
      send_burst(data, off, burst_end);  // retransmit the window
    }
    off = burst_end;
  }
  return net::StreamIoResult::Ok;
}

net::StreamIoResult EmuStreamChannel::read_exact(uint8_t* dst, size_t n,
                                                 double deadline_s) {
  const bool got = world_.wait_until_on(&link_.cv, deadline_s, [&] {
    pump_inbox();
    return reply_.has_value();
  });
  if (!got) return net::StreamIoResult::Timeout;
  const size_t have = std::min(n, reply_->size());
  std::copy_n(reply_->begin(), have, dst);
  return have == n ? net::StreamIoResult::Ok : net::StreamIoResult::Closed;
}

void EmuStreamChannel::close(double teardown_delay_s) {
  if (closed_) return;
  closed_ = true;
  if (teardown_delay_s > 0.0) {
    world_.sleep_for(teardown_delay_s);
  }
  world_.run_locked([&] {
    impl_.conns.erase(conn_id_);
    auto& inbox = link_.inbox;
    inbox.erase(std::remove_if(inbox.begin(), inbox.end(),
                               [&](const Network::Link::Msg& m) {
                                 return m.kind != MsgKind::UdpReply &&
                                        m.conn == conn_id_;
                               }),
                inbox.end());
  });
}

// ---------------------------------------------------------------------------
// Endpoint
// ---------------------------------------------------------------------------

std::unique_ptr<net::DatagramChannel> EmuEndpoint::open_datagram() {
  return world_.run_locked([&]() -> std::unique_ptr<net::DatagramChannel> {
    if (!link_.admin_up) return nullptr;
    return std::make_unique<EmuDatagramChannel>(net_, world_, link_, impl_);
  });
}

net::StreamOpenResult EmuEndpoint::open_stream(net::SecureMode mode,
                                               double deadline_s) {
  net::StreamOpenResult res;
  const bool up = world_.run_locked([&] { return link_.admin_up; });
  if (!up) {
    res.fail_status = StatusCode::LINK_DOWN;
    res.fail_detail = "link administratively down";
    return res;
  }
  const uint64_t conn_id = world_.run_locked([&] { return impl_.next_conn++; });
  auto chan =
      std::make_unique<EmuStreamChannel>(net_, world_, link_, impl_, conn_id);
  const bool secure = mode == net::SecureMode::ModelHandshake;

  chan->send_syn(secure);
  for (;;) {
    const double rto_at = world_.now() + kSynRto_s;
    const bool got =
        world_.wait_until_on(&link_.cv, std::min(deadline_s, rto_at), [&] {
          chan->pump_inbox();
          return chan->synacked_;
        });
    if (got) break;
    if (world_.now() >= deadline_s) {
      res.fail_status = StatusCode::CLIENT_TIMEOUT;
      res.fail_detail = "connect timed out";
      return res;
    }
    chan->send_syn(secure);
  }

  if (secure) {
    for (int i = 0; i < kSecureHandshakeRounds; ++i) {
      chan->send_hs(i);
      for (;;) {
        const double rto_at = world_.now() + kDataRto_s;
        const bool got =
            world_.wait_until_on(&link_.cv, std::min(deadline_s, rto_at), [&] {
              chan->pump_inbox();
              return chan->hs_done_ > i;
            });
        if (got) break;
        if (world_.now() >= deadline_s) {
          res.fail_status = StatusCode::CLIENT_TIMEOUT;
          res.fail_detail = "handshake timed out";
          return res;
        }
        chan->send_hs(i);
      }
    }
  }

  res.channel = std::move(chan);
  return res;
}

LinkMetadata EmuEndpoint::sample_metadata() {
  return world_.run_locked([&] {
    LinkMetadata m;
    m.link_id = link_.profile.link_id;
    m.sampled_at_ms = world_.wall_ms();
    int comp = link_.last_component;
    if (comp < 0) {
      // No traffic yet: draw the initial radio state from the mixture.
      const double u = link_.meta_rng.u01();
      double acc = 0.0;
      comp = static_cast<int>(link_.profile.mixture.components.size()) - 1;
      for (size_t i = 0; i < link_.profile.mixture.components.size(); ++i) {
        acc += link_.profile.mixture.components[i].weight;
        if (u < acc) {
          comp = static_cast<int>(i);
          break;
        }
      }
    }
    const auto clamp_dbm = [](double v) {
      return std::min(-40.0, std::max(-150.0, v));
    };
    const bool lte =
        static_cast<size_t>(comp) == link_.profile.mixture.fastest_component();
    if (lte) {
      m.radio_tech = RadioTech::LTE;
      m.rsrp_dbm = clamp_dbm(-92.0 + 7.0 * link_.meta_rng.normal());
      m.rssi_dbm = clamp_dbm(-63.0 + 6.0 * link_.meta_rng.normal());
    } else {
      m.radio_tech = RadioTech::ThreeG;
      m.rssi_dbm = clamp_dbm(-80.0 + 7.0 * link_.meta_rng.normal());
    }
    return m;
  });
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

Network::Network(World& world, TransportConfig cfg) : world_(world) {
  cfg.validate();
  impl_ = std::make_unique<Impl>();
  impl_->cfg = cfg;
}

Network::~Network() = default;

net::LinkEndpoint& Network::attach(const LinkProfile& profile) {
  profile.validate();
  return *world_.run_locked([&]() -> net::LinkEndpoint* {
    auto link = std::make_unique<Link>(profile,
                                       static_cast<uint32_t>(impl_->links.size()));
    link->endpoint = std::make_unique<EmuEndpoint>(*this, world_, *link, *impl_);
    auto* ep = link->endpoint.get();
    impl_->links.push_back(std::move(link));
    return ep;
  });
}

void Network::set_link_up(const std::string& link_id, bool up) {
  world_.run_locked([&] {
    for (auto& l : impl_->links) {
      if (l->profile.link_id == link_id) l->admin_up = up;
    }
  });
}

std::vector<ServerTxnLog> Network::server_log() const {
  return world_.run_locked([&] { return impl_->slog; });
}

size_t Network::malformed_count() const {
  return world_.run_locked([&] { return impl_->malformed; });
}

void Network::enable_trace(bool on) {
  world_.run_locked([&] { impl_->trace_on = on; });
}

std::vector<std::string> Network::trace() const {
  return world_.run_locked([&] {
    std::vector<std::string> out;
    for (const auto& l : impl_->links) {
      out.insert(out.end(), l->send_trace.begin(), l->send_trace.end());
    }
    out.insert(out.end(), impl_->event_trace.begin(), impl_->event_trace.end());
    return out;
  });
}

// ---------------------------------------------------------------------------
// EmuLegRunner
// ---------------------------------------------------------------------------

void EmuLegRunner::run_concurrently(std::vector<std::function<void()>> legs) {
  const int n = static_cast<int>(legs.size());
  if (n == 0) return;
  // The caller stays runnable while legs register, so virtual time cannot
  // advance before every leg observes the same start instant.
  std::latch entered(n);
  std::atomic<int> done{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(legs.size());
  for (auto& leg : legs) {
    threads.emplace_back([&, fn = std::move(leg)] {
      world_.actor_enter();
      entered.count_down();
      entered.wait();
      try {
        fn();
      } catch (...) {
        std::lock_guard lk(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
      done.fetch_add(1);
      world_.actor_leave();  // pokes the waiting caller
    });
  }
  entered.wait();
  world_.wait_until(std::numeric_limits<double>::infinity(),
                    [&] { return done.load() == n; });
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace txbench::emu
