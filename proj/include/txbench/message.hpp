// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "txbench/types.hpp"

namespace txbench::message {

enum class EventType {
  VehicleObstruction,
  AbnormalTraffic,
  AnimalPresence,
  WeatherHazard,
};

const char* to_string(EventType t);
std::optional<EventType> event_type_from_string(std::string_view s);

/// A road hazard observation as produced by an on-board sensor.
struct WarningEvent {
  std::string event_id;
  EventType event_type = EventType::VehicleObstruction;
  uint64_t timestamp_ms = 0;  // UTC wall clock, millisecond precision
  double latitude = 0.0;      // degrees WGS84
  double longitude = 0.0;

  // event_id non-empty and XML-safe, coordinates within WGS84 bounds.
  void validate() const;
};

/// The upload payload: an XML envelope carrying the event, a fixed-size
/// signature block, and filler padding so that the serialized body hits the
/// size-class byte count exactly.
struct WarningMessage {
  std::string body;
  uint64_t declared_size = 0;
  WarningEvent event;
};

/// Builds the warning message for `size_class`. Byte-deterministic: the same
/// event and class always produce the same body.
WarningMessage build_warning_message(const WarningEvent& event,
                                     SizeClass size_class);

/// Recovers the event fields from a message body. Throws ValidationError if
/// the body does not carry the expected elements.
WarningEvent parse_warning_message(std::string_view body);

/// ISO 8601 UTC with millisecond precision, e.g. 2026-08-08T12:00:00.123Z.
std::string format_timestamp_ms(uint64_t ms);
std::optional<uint64_t> parse_timestamp_ms(std::string_view s);

}  // namespace txbench::message
