// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace txbench {

/// Input failed a domain invariant (bad coordinates, bad config, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The fixed message envelope does not fit into the requested size class.
class SizeInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile calibration did not converge within its iteration budget.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem / socket failure that aborts the current operation.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A log file carries a schema_version this build does not understand.
class SchemaVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives an independent RNG seed from a base seed and up to three indices.
/// Used wherever parallel or per-entity streams must not overlap.
constexpr uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0,
                               uint64_t c = 0) {
  uint64_t s = splitmix64(base ^ 0x243f6a8885a308d3ull);
  s = splitmix64(s ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b ^ 0x452821e638d01377ull));
  s = splitmix64(s ^ splitmix64(c ^ 0xbe5466cf34e90c6cull));
  return s;
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double u01_from_bits(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace txbench
