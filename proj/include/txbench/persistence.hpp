// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#pragma once

#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include "txbench/types.hpp"

namespace txbench::persistence {

inline constexpr int kSchemaVersion = 1;

/// One transaction as persisted: the TransactionRecord plus its round
/// context and the metadata snapshot, flattened to one JSON object per line.
struct LogRecord {
  int schema_version = kSchemaVersion;
  uint64_t round_index = 0;
  double start_skew_s = 0.0;
  SizeClass size_class = SizeClass::SMALL;
  TransactionRecord txn;
};

std::string to_json_line(const LogRecord& rec);

/// Parses one line. Throws SchemaVersionError for an unknown schema_version
/// and ValidationError for anything else malformed.
LogRecord from_json_line(const std::string& line);

/// Append-only log sink. Concurrent appenders never interleave within a
/// record; I/O failure throws IoError and leaves the partial log intact.
class LogWriter {
 public:
  explicit LogWriter(const std::string& path, bool truncate = true);
  ~LogWriter();

  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  void append(const LogRecord& rec);
  void append_line(const std::string& line);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::FILE* file_;
  std::mutex mu_;
};

struct LoadDiagnostics {
  struct BadLine {
    size_t line_no = 0;  // 1-based
    std::string error;
  };
  std::vector<BadLine> bad;
};

/// Streams all records from `path`. Malformed lines are reported through
/// `diag` (with line numbers) and skipped; a missing file or an unknown
/// schema version is a hard error.
std::vector<LogRecord> load(const std::string& path,
                            LoadDiagnostics* diag = nullptr);

}  // namespace txbench::persistence
