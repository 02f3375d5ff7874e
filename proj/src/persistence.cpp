// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/persistence.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace txbench::persistence {

using nlohmann::json;

std::string to_json_line(const LogRecord& rec) {
  const auto& t = rec.txn;
  json j;
  j["schema_version"] = rec.schema_version;
  j["round_index"] = rec.round_index;
  j["start_skew_s"] = rec.start_skew_s;
  j["size_class"] = to_string(rec.size_class);
  j["protocol"] = to_string(t.protocol);
  j["link_id"] = t.link_id;
  j["txn_id"] = t.txn_id;
  j["start_wall_ms"] = t.start_wall_ms;
  j["start_mono_s"] = t.start_mono_s;
  j["duration_s"] = t.duration_s;
  j["status"] = to_string(t.status);
  if (!t.status_detail.empty()) j["status_detail"] = t.status_detail;
  j["bytes_sent"] = t.bytes_sent;
  j["bytes_acked"] = t.bytes_acked;
  j["radio_tech"] = to_string(t.meta.radio_tech);
  if (t.meta.rsrp_dbm) j["rsrp_dbm"] = *t.meta.rsrp_dbm;
  if (t.meta.rssi_dbm) j["rssi_dbm"] = *t.meta.rssi_dbm;
  if (t.meta.latitude) j["latitude"] = *t.meta.latitude;
  if (t.meta.longitude) j["longitude"] = *t.meta.longitude;
  j["meta_sampled_at_ms"] = t.meta.sampled_at_ms;
  return j.dump();
}

LogRecord from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad JSON: ") + e.what());
  }
  if (!j.contains("schema_version")) {
    throw ValidationError("missing schema_version");
  }
  const int v = j["schema_version"].get<int>();
  if (v != kSchemaVersion) {
    throw SchemaVersionError("unsupported schema_version " +
                             std::to_string(v));
  }
  LogRecord rec;
  try {
    rec.schema_version = v;
    rec.round_index = j.at("round_index").get<uint64_t>();
    rec.start_skew_s = j.at("start_skew_s").get<double>();
    const auto sc = size_class_from_string(
        j.at("size_class").get<std::string>());
    if (!sc) throw ValidationError("bad size_class");
    rec.size_class = *sc;

    auto& t = rec.txn;
    const auto proto =
        protocol_from_string(j.at("protocol").get<std::string>());
    if (!proto) throw ValidationError("bad protocol");
    t.protocol = *proto;
    t.link_id = j.at("link_id").get<std::string>();
    t.txn_id = j.at("txn_id").get<uint64_t>();
    t.start_wall_ms = j.at("start_wall_ms").get<uint64_t>();
    t.start_mono_s = j.at("start_mono_s").get<double>();
    t.duration_s = j.at("duration_s").get<double>();
    const auto st = status_from_string(j.at("status").get<std::string>());
    if (!st) throw ValidationError("bad status");
    t.status = *st;
    t.status_detail = j.value("status_detail", std::string{});
    t.bytes_sent = j.at("bytes_sent").get<uint64_t>();
    t.bytes_acked = j.at("bytes_acked").get<uint64_t>();
    t.meta.link_id = t.link_id;
    const auto rt =
        radio_tech_from_string(j.value("radio_tech", std::string("unknown")));
    t.meta.radio_tech = rt ? *rt : RadioTech::Unknown;
    if (j.contains("rsrp_dbm")) t.meta.rsrp_dbm = j["rsrp_dbm"].get<double>();
    if (j.contains("rssi_dbm")) t.meta.rssi_dbm = j["rssi_dbm"].get<double>();
    if (j.contains("latitude")) t.meta.latitude = j["latitude"].get<double>();
    if (j.contains("longitude"))
      t.meta.longitude = j["longitude"].get<double>();
    t.meta.sampled_at_ms = j.value("meta_sampled_at_ms", uint64_t{0});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad record field: ") + e.what());
  }
  return rec;
}

LogWriter::LogWriter(const std::string& path, bool truncate)
    : path_(path), file_(std::fopen(path.c_str(), truncate ? "w" : "a")) {
  if (!file_) throw IoError("cannot open log for writing: " + path);
}

LogWriter::~LogWriter() {
  if (file_) std::fclose(file_);
}

void LogWriter::append(const LogRecord& rec) { append_line(to_json_line(rec)); }

void LogWriter::append_line(const std::string& line) {
  std::lock_guard lk(mu_);
  std::string out = line;
  out.push_back('\n');
  if (std::fwrite(out.data(), 1, out.size(), file_) != out.size() ||
      std::fflush(file_) != 0) {
    throw IoError("log append failed: " + path_);
  }
}

std::vector<LogRecord> load(const std::string& path, LoadDiagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open log: " + path);
  std::vector<LogRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const SchemaVersionError&) {
      throw;  // version mismatch is never silently skipped
    } catch (const ValidationError& e) {
      if (diag) diag->bad.push_back({line_no, e.what()});
    }
  }
  return out;
}

}  // namespace txbench::persistence
