// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/message.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>

#include "txbench/common.hpp"

namespace txbench::message {

namespace {

constexpr std::string_view kPadPattern = "TXPAD-0123456789-";
constexpr std::size_t kSignatureChars = 256;

std::string format_coord(double v) {
  char buf[48];
  // %.17g keeps the exact double value across a text round trip.
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool xml_safe_id(std::string_view id) {
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Fixed-size opaque signature block: base64 text derived from a digest of the
// canonical event fields. Stands in for an X.509-signed digest; only the byte
// footprint and determinism matter here.
std::string signature_block(const WarningEvent& e) {
  std::string canon = e.event_id;
  canon += '|';
  canon += to_string(e.event_type);
  canon += '|';
  canon += std::to_string(e.timestamp_ms);
  canon += '|';
  canon += format_coord(e.latitude);
  canon += '|';
  canon += format_coord(e.longitude);

  uint64_t state = fnv1a64(canon);
  // 192 pseudo-random bytes -> 256 base64 chars, no padding needed.
  static constexpr char kB64[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve(kSignatureChars);
  uint8_t bytes[192];
  for (auto& b : bytes) {
    state = splitmix64(state);
    b = static_cast<uint8_t>(state >> 24);
  }
  for (std::size_t i = 0; i < sizeof bytes; i += 3) {
    const uint32_t v = (uint32_t(bytes[i]) << 16) | (uint32_t(bytes[i + 1]) << 8) |
                       uint32_t(bytes[i + 2]);
    out += kB64[(v >> 18) & 0x3f];
    out += kB64[(v >> 12) & 0x3f];
    out += kB64[(v >> 6) & 0x3f];
    out += kB64[v & 0x3f];
  }
  return out;
}

std::string_view find_element(std::string_view body, std::string_view tag) {
  // Matches "<tag ...>content</tag>" or "<tag>content</tag>".
  const std::string probe = "<" + std::string(tag);
  const std::string close = "</" + std::string(tag) + ">";
  std::size_t b = body.find(probe);
  while (b != std::string_view::npos) {
    const char next = b + probe.size() < body.size() ? body[b + probe.size()]
                                                     : '\0';
    if (next == '>' || next == ' ') break;
    b = body.find(probe, b + 1);
  }
  if (b == std::string_view::npos) {
    throw ValidationError("message body: missing element <" + std::string(tag) +
                          ">");
  }
  const auto open_end = body.find('>', b);
  if (open_end == std::string_view::npos) {
    throw ValidationError("message body: malformed element <" +
                          std::string(tag) + ">");
  }
  const auto start = open_end + 1;
  const auto e = body.find(close, start);
  if (e == std::string_view::npos) {
    throw ValidationError("message body: unterminated element <" +
                          std::string(tag) + ">");
  }
  return body.substr(start, e - start);
}

std::string_view find_attr(std::string_view body, std::string_view element,
                           std::string_view attr) {
  const std::string probe = "<" + std::string(element);
  const auto b = body.find(probe);
  if (b == std::string_view::npos) {
    throw ValidationError("message body: missing element <" +
                          std::string(element) + ">");
  }
  const auto tag_end = body.find('>', b);
  std::string_view tag = body.substr(b, tag_end - b);
  const std::string key = std::string(attr) + "=\"";
  const auto a = tag.find(key);
  if (a == std::string_view::npos) {
    throw ValidationError("message body: missing attribute " +
                          std::string(attr));
  }
  const auto start = a + key.size();
  const auto e = tag.find('"', start);
  return tag.substr(start, e - start);
}

}  // namespace

const char* to_string(EventType t) {
  switch (t) {
    case EventType::VehicleObstruction:
      return "VehicleObstruction";
    case EventType::AbnormalTraffic:
      return "AbnormalTraffic";
    case EventType::AnimalPresence:
      return "AnimalPresence";
    case EventType::WeatherHazard:
      return "WeatherHazard";
  }
  return "VehicleObstruction";
}

std::optional<EventType> event_type_from_string(std::string_view s) {
  for (EventType t :
       {EventType::VehicleObstruction, EventType::AbnormalTraffic,
        EventType::AnimalPresence, EventType::WeatherHazard}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

void WarningEvent::validate() const {
  if (event_id.empty()) throw ValidationError("event_id must be non-empty");
  if (!xml_safe_id(event_id)) {
    throw ValidationError("event_id must use [A-Za-z0-9_.-] only");
  }
  if (!(latitude >= -90.0 && latitude <= 90.0)) {
    throw ValidationError("latitude out of [-90, 90]");
  }
  if (!(longitude >= -180.0 && longitude <= 180.0)) {
    throw ValidationError("longitude out of [-180, 180]");
  }
}

std::string format_timestamp_ms(uint64_t ms) {
  const time_t secs = static_cast<time_t>(ms / 1000);
  struct tm tm_utc{};
  gmtime_r(&secs, &tm_utc);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03uZ",
                tm_utc.tm_year + 1900, tm_utc.tm_mon + 1, tm_utc.tm_mday,
                tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec,
                static_cast<unsigned>(ms % 1000));
  return buf;
}

std::optional<uint64_t> parse_timestamp_ms(std::string_view s) {
  struct tm tm_utc{};
  unsigned msec = 0;
  char zulu = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d.%3u%c",
                  &tm_utc.tm_year, &tm_utc.tm_mon, &tm_utc.tm_mday,
                  &tm_utc.tm_hour, &tm_utc.tm_min, &tm_utc.tm_sec, &msec,
                  &zulu) != 8 ||
      zulu != 'Z') {
    return std::nullopt;
  }
  tm_utc.tm_year -= 1900;
  tm_utc.tm_mon -= 1;
  const time_t secs = timegm(&tm_utc);
  if (secs < 0) return std::nullopt;
  return static_cast<uint64_t>(secs) * 1000ull + msec;
}

WarningMessage build_warning_message(const WarningEvent& event,
                                     SizeClass size_class) {
  event.validate();
  const uint64_t target = message_size(size_class);

  std::string xml;
  xml.reserve(target);
  xml += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  xml += "<d2LogicalModel xmlns=\"http://datex2.eu/schema/2/2_0\" "
         "modelBaseVersion=\"2\">\n";
  xml += " <payloadPublication type=\"SituationPublication\" lang=\"en\">\n";
  xml += "  <publicationTime>" + format_timestamp_ms(event.timestamp_ms) +
         "</publicationTime>\n";
  xml += "  <situation id=\"SIT-" + event.event_id + "\">\n";
  xml += "   <situationRecord type=\"";
  xml += to_string(event.event_type);
  xml += "\" id=\"" + event.event_id + "\" version=\"1\">\n";
  xml += "    <situationRecordCreationTime>" +
         format_timestamp_ms(event.timestamp_ms) +
         "</situationRecordCreationTime>\n";
  xml += "    <validity><validityStatus>active</validityStatus></validity>\n";
  xml += "    <groundPointLocation><pointByCoordinates><pointCoordinates>\n";
  xml += "     <latitude>" + format_coord(event.latitude) + "</latitude>\n";
  xml += "     <longitude>" + format_coord(event.longitude) + "</longitude>\n";
  xml += "    </pointCoordinates></pointByCoordinates></groundPointLocation>\n";
  xml += "   </situationRecord>\n";
  xml += "  </situation>\n";
  xml += " </payloadPublication>\n";
  xml += " <signature algorithm=\"digest-b64\">" + signature_block(event) +
         "</signature>\n";

  constexpr std::string_view pad_open = " <padding>";
  constexpr std::string_view pad_close = "</padding>\n";
  constexpr std::string_view footer = "</d2LogicalModel>\n";
  const uint64_t fixed = xml.size() + pad_open.size() + pad_close.size() +
                         footer.size();
  if (fixed > target) {
    throw SizeInfeasibleError("envelope (" + std::to_string(fixed) +
                              " bytes) exceeds size class " +
                              std::to_string(target));
  }

  const uint64_t fill = target - fixed;
  xml += pad_open;
  for (uint64_t i = 0; i < fill; ++i) {
    xml += kPadPattern[i % kPadPattern.size()];
  }
  xml += pad_close;
  xml += footer;

  WarningMessage msg;
  msg.body = std::move(xml);
  msg.declared_size = target;
  msg.event = event;
  if (msg.body.size() != target) {
    throw SizeInfeasibleError("internal sizing error");  // unreachable
  }
  return msg;
}

WarningEvent parse_warning_message(std::string_view body) {
  WarningEvent e;
  e.event_id = std::string(find_attr(body, "situationRecord", "id"));
  const auto type_str = find_attr(body, "situationRecord", "type");
  const auto type = event_type_from_string(type_str);
  if (!type) {
    throw ValidationError("unknown situationRecord type: " +
                          std::string(type_str));
  }
  e.event_type = *type;
  const auto ts = parse_timestamp_ms(find_element(body, "publicationTime"));
  if (!ts) throw ValidationError("bad publicationTime");
  e.timestamp_ms = *ts;
  e.latitude = std::strtod(std::string(find_element(body, "latitude")).c_str(),
                           nullptr);
  e.longitude = std::strtod(
      std::string(find_element(body, "longitude")).c_str(), nullptr);
  // Signature element must be present even though its content is opaque.
  (void)find_element(body, "signature");
  e.validate();
  return e;
}

}  // namespace txbench::message
