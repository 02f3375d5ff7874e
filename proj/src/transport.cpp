// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/transport.hpp"

#include <algorithm>
#include <cstring>

#include "txbench/wire.hpp"

namespace txbench::transport {

namespace {

TransactionRecord make_record(Protocol proto, net::LinkEndpoint& ep,
                              uint64_t txn_id, uint64_t bytes) {
  TransactionRecord rec;
  rec.protocol = proto;
  rec.link_id = ep.link_id();
  rec.txn_id = txn_id;
  rec.bytes_sent = bytes;
  return rec;
}

std::string compose_http_post(uint64_t txn_id, const std::string& body) {
  std::string req;
  req.reserve(body.size() + 160);
  req += "POST /upload HTTP/1.1\r\n";
  req += "Host: txbench\r\n";
  req += "X-Transaction-Id: " + std::to_string(txn_id) + "\r\n";
  req += "Content-Type: application/xml\r\n";
  req += "Content-Length: " + std::to_string(body.size()) + "\r\n";
  req += "Connection: close\r\n\r\n";
  req += body;
  return req;
}

// Reads an HTTP response off the stream and extracts the decimal byte count
// from its body. Replies are tiny, so byte-wise header reads are fine.
struct HttpReply {
  bool ok = false;
  net::StreamIoResult io = net::StreamIoResult::Ok;
  uint64_t count = 0;
};

HttpReply read_http_reply(net::StreamChannel& ch, double deadline_s) {
  HttpReply out;
  std::string headers;
  uint8_t c = 0;
  while (headers.size() < 8192 &&
         (headers.size() < 4 ||
          headers.compare(headers.size() - 4, 4, "\r\n\r\n") != 0)) {
    const auto r = ch.read_exact(&c, 1, deadline_s);
    if (r != net::StreamIoResult::Ok) {
      out.io = r;
      return out;
    }
    headers.push_back(static_cast<char>(c));
  }
  uint64_t content_length = 0;
  const auto pos = headers.find("Content-Length:");
  if (pos != std::string::npos) {
    content_length = std::strtoull(headers.c_str() + pos + 15, nullptr, 10);
  }
  if (content_length == 0 || content_length > 64) {
    out.io = net::StreamIoResult::Closed;
    return out;
  }
  std::string body(content_length, '\0');
  const auto r = ch.read_exact(reinterpret_cast<uint8_t*>(body.data()),
                               content_length, deadline_s);
  if (r != net::StreamIoResult::Ok) {
    out.io = r;
    return out;
  }
  out.ok = true;
  out.count = std::strtoull(body.c_str(), nullptr, 10);
  return out;
}

}  // namespace

TransactionRecord udp_transact(net::LinkEndpoint& ep,
                               const message::WarningMessage& msg,
                               const TransportConfig& cfg, uint64_t txn_id) {
  cfg.validate();
  auto rec = make_record(Protocol::UDP, ep, txn_id, msg.body.size());

  auto chan = ep.open_datagram();
  rec.start_mono_s = ep.now();
  rec.start_wall_ms = ep.wall_ms();
  if (!chan) {
    rec.status = StatusCode::LINK_DOWN;
    rec.status_detail = "link unavailable";
    rec.duration_s = 0.0;
    return rec;
  }

  const uint64_t total = msg.body.size();
  const size_t payload = cfg.udp_payload_bytes;
  const auto* body = reinterpret_cast<const uint8_t*>(msg.body.data());

  // Timer runs from the first byte handed to the link.
  rec.start_mono_s = ep.now();
  rec.start_wall_ms = ep.wall_ms();
  const double deadline = rec.start_mono_s + cfg.client_timeout_s;

  std::vector<uint8_t> frame;
  uint32_t seq = 0;
  for (uint64_t off = 0; off < total; off += payload) {
    const size_t len = static_cast<size_t>(
        std::min<uint64_t>(payload, total - off));
    frame.resize(wire::kDatagramHeaderSize + len);
    wire::encode_datagram_header(
        frame.data(), {txn_id, static_cast<uint32_t>(total), seq++});
    std::memcpy(frame.data() + wire::kDatagramHeaderSize, body + off, len);
    if (!chan->send(frame)) {
      rec.status = StatusCode::LINK_DOWN;
      rec.status_detail = "send failed";
      rec.duration_s = ep.now() - rec.start_mono_s;
      return rec;
    }
  }

  for (;;) {
    auto datagram = chan->recv(deadline);
    if (!datagram) {
      rec.status = StatusCode::CLIENT_TIMEOUT;
      rec.duration_s = cfg.client_timeout_s;
      return rec;
    }
    const auto reply = wire::decode_reply(*datagram);
    if (!reply || reply->txn_id != txn_id) continue;  // stale or stray
    rec.bytes_acked = reply->received;
    rec.duration_s = ep.now() - rec.start_mono_s;
    rec.status = reply->received == total ? StatusCode::SUCCESS
                                          : StatusCode::BYTE_MISMATCH;
    return rec;
  }
}

namespace {

TransactionRecord stream_transact(Protocol proto, net::LinkEndpoint& ep,
                                  const message::WarningMessage& msg,
                                  const TransportConfig& cfg,
                                  uint64_t txn_id) {
  cfg.validate();
  auto rec = make_record(proto, ep, txn_id, msg.body.size());
  const bool secure = proto == Protocol::SECURE;
  const bool http = secure && ep.secure_uses_http();

  // Connection initiation starts the timer.
  rec.start_mono_s = ep.now();
  rec.start_wall_ms = ep.wall_ms();
  const double deadline = rec.start_mono_s + cfg.client_timeout_s;

  auto open = ep.open_stream(
      secure ? net::SecureMode::ModelHandshake : net::SecureMode::None,
      deadline);
  if (!open.channel) {
    rec.status = open.fail_status;
    rec.status_detail = open.fail_detail;
    rec.duration_s = open.fail_status == StatusCode::CLIENT_TIMEOUT
                         ? cfg.client_timeout_s
                         : ep.now() - rec.start_mono_s;
    return rec;
  }
  auto& ch = *open.channel;

  std::vector<uint8_t> buf;
  if (http) {
    const std::string req = compose_http_post(txn_id, msg.body);
    buf.assign(req.begin(), req.end());
  } else {
    buf.resize(wire::kStreamPreambleSize + msg.body.size());
    wire::encode_stream_preamble(
        buf.data(), {txn_id, static_cast<uint32_t>(msg.body.size())});
    std::memcpy(buf.data() + wire::kStreamPreambleSize, msg.body.data(),
                msg.body.size());
  }

  const auto wr = ch.write_all(buf, deadline);
  if (wr == net::StreamIoResult::Timeout) {
    rec.status = StatusCode::CLIENT_TIMEOUT;
    rec.duration_s = cfg.client_timeout_s;
    ch.close(cfg.teardown_delay_s);
    return rec;
  }
  if (wr == net::StreamIoResult::Closed) {
    rec.status = StatusCode::ERROR;
    rec.status_detail = "connection closed during send";
    rec.duration_s = ep.now() - rec.start_mono_s;
    ch.close(cfg.teardown_delay_s);
    return rec;
  }

  uint64_t acked = 0;
  bool got = false;
  if (http) {
    const auto reply = read_http_reply(ch, deadline);
    if (reply.ok) {
      acked = reply.count;
      got = true;
    } else if (reply.io == net::StreamIoResult::Timeout) {
      rec.status = StatusCode::CLIENT_TIMEOUT;
      rec.duration_s = cfg.client_timeout_s;
    } else {
      rec.status = StatusCode::ERROR;
      rec.status_detail = "connection closed before reply";
      rec.duration_s = ep.now() - rec.start_mono_s;
    }
  } else {
    uint8_t rb[wire::kReplySize];
    const auto rr = ch.read_exact(rb, sizeof rb, deadline);
    if (rr == net::StreamIoResult::Ok) {
      // Streams are connection-scoped, so the reply is trusted as-is: a
      // server that stalled before the preamble cannot echo the txn id.
      const auto reply = wire::decode_reply(rb);
      acked = reply->received;
      got = true;
    } else if (rr == net::StreamIoResult::Timeout) {
      rec.status = StatusCode::CLIENT_TIMEOUT;
      rec.duration_s = cfg.client_timeout_s;
    } else {
      rec.status = StatusCode::ERROR;
      rec.status_detail = "connection closed before reply";
      rec.duration_s = ep.now() - rec.start_mono_s;
    }
  }

  if (got) {
    rec.bytes_acked = acked;
    rec.duration_s = ep.now() - rec.start_mono_s;
    rec.status = acked == msg.body.size() ? StatusCode::SUCCESS
                                          : StatusCode::BYTE_MISMATCH;
  }

  // Teardown is outside the timed window by construction.
  ch.close(cfg.teardown_delay_s);
  return rec;
}

}  // namespace

TransactionRecord tcp_transact(net::LinkEndpoint& ep,
                               const message::WarningMessage& msg,
                               const TransportConfig& cfg, uint64_t txn_id) {
  return stream_transact(Protocol::TCP, ep, msg, cfg, txn_id);
}

TransactionRecord secure_transact(net::LinkEndpoint& ep,
                                  const message::WarningMessage& msg,
                                  const TransportConfig& cfg,
                                  uint64_t txn_id) {
  return stream_transact(Protocol::SECURE, ep, msg, cfg, txn_id);
}

TransactionRecord transact(Protocol proto, net::LinkEndpoint& ep,
                           const message::WarningMessage& msg,
                           const TransportConfig& cfg, uint64_t txn_id) {
  switch (proto) {
    case Protocol::UDP:
      return udp_transact(ep, msg, cfg, txn_id);
    case Protocol::TCP:
      return tcp_transact(ep, msg, cfg, txn_id);
    case Protocol::SECURE:
      return secure_transact(ep, msg, cfg, txn_id);
  }
  throw ValidationError("unknown protocol");
}

}  // namespace txbench::transport
