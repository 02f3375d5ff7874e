// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace txbench::wire {

// On-the-wire framing. All integers are unsigned big-endian.
//
//   UDP datagram  : txn id (8) | total message size (4) | sequence (4) | payload
//   stream preamble: txn id (8) | total message size (4)
//   reply         : txn id (8) | received byte count (8)

constexpr std::size_t kDatagramHeaderSize = 16;
constexpr std::size_t kStreamPreambleSize = 12;
constexpr std::size_t kReplySize = 16;

inline void put_u32be(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

inline void put_u64be(std::uint8_t* p, std::uint64_t v) {
  put_u32be(p, static_cast<std::uint32_t>(v >> 32));
  put_u32be(p + 4, static_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint64_t get_u64be(const std::uint8_t* p) {
  return (std::uint64_t(get_u32be(p)) << 32) | get_u32be(p + 4);
}

struct DatagramHeader {
  std::uint64_t txn_id = 0;
  std::uint32_t total_size = 0;
  std::uint32_t seq = 0;
};

inline void encode_datagram_header(std::uint8_t* dst, const DatagramHeader& h) {
  put_u64be(dst, h.txn_id);
  put_u32be(dst + 8, h.total_size);
  put_u32be(dst + 12, h.seq);
}

inline std::optional<DatagramHeader> decode_datagram_header(
    std::span<const std::uint8_t> d) {
  if (d.size() < kDatagramHeaderSize) return std::nullopt;
  DatagramHeader h;
  h.txn_id = get_u64be(d.data());
  h.total_size = get_u32be(d.data() + 8);
  h.seq = get_u32be(d.data() + 12);
  return h;
}

struct StreamPreamble {
  std::uint64_t txn_id = 0;
  std::uint32_t total_size = 0;
};

inline void encode_stream_preamble(std::uint8_t* dst, const StreamPreamble& p) {
  put_u64be(dst, p.txn_id);
  put_u32be(dst + 8, p.total_size);
}

inline std::optional<StreamPreamble> decode_stream_preamble(
    std::span<const std::uint8_t> d) {
  if (d.size() < kStreamPreambleSize) return std::nullopt;
  StreamPreamble p;
  p.txn_id = get_u64be(d.data());
  p.total_size = get_u32be(d.data() + 8);
  return p;
}

struct Reply {
  std::uint64_t txn_id = 0;
  std::uint64_t received = 0;
};

inline std::vector<std::uint8_t> encode_reply(const Reply& r) {
  std::vector<std::uint8_t> out(kReplySize);
  put_u64be(out.data(), r.txn_id);
  put_u64be(out.data() + 8, r.received);
  return out;
}

inline std::optional<Reply> decode_reply(std::span<const std::uint8_t> d) {
  if (d.size() < kReplySize) return std::nullopt;
  Reply r;
  r.txn_id = get_u64be(d.data());
  r.received = get_u64be(d.data() + 8);
  return r;
}

/// Number of datagrams a message of `total` bytes occupies at `payload` bytes
/// per datagram.
constexpr std::uint32_t datagram_count(std::uint64_t total,
                                       std::uint32_t payload) {
  return static_cast<std::uint32_t>((total + payload - 1) / payload);
}

}  // namespace txbench::wire
