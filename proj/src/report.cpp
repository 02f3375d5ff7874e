// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "txbench/analysis.hpp"
#include "txbench/multiaccess.hpp"

namespace txbench::analysis {

namespace {

namespace fs = std::filesystem;

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct TsvWriter {
  explicit TsvWriter(const fs::path& p) : out(p) {
    if (!out) throw IoError("cannot write report file: " + p.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << '\t';
      out << cells[i];
    }
    out << '\n';
  }
  std::ofstream out;
};

std::vector<std::string> summary_row(const std::string& proto,
                                     const std::string& mode,
                                     const SummaryStats& s) {
  std::vector<std::string> cells = {proto, mode, std::to_string(s.attempted),
                                    std::to_string(s.successful)};
  if (s.has_stats) {
    cells.insert(cells.end(),
                 {num(s.mean_s), num(s.stddev_s), num(s.median_s), num(s.min_s),
                  num(s.q90_s), num(s.max_s)});
  } else {
    cells.insert(cells.end(), {"-", "-", "-", "-", "-", "-"});
  }
  return cells;
}

}  // namespace

ReportResult write_report(const std::string& log_path,
                          const std::string& out_dir,
                          const ReportOptions& opt) {
  ReportResult result;
  persistence::LoadDiagnostics diag;
  const auto records = persistence::load(log_path, &diag);
  result.records = records.size();
  result.malformed_lines = diag.bad.size();
  for (const auto& bad : diag.bad) {
    std::fprintf(stderr, "warning: %s:%zu: %s (skipped)\n", log_path.c_str(),
                 bad.line_no, bad.error.c_str());
  }
  if (records.empty()) {
    std::fprintf(stderr, "warning: %s holds no usable records\n",
                 log_path.c_str());
  }

  fs::create_directories(out_dir);

  // The whole pipeline works on synchronized rounds, per size class.
  for (const SizeClass cls : {SizeClass::SMALL, SizeClass::LARGE}) {
    std::vector<persistence::LogRecord> class_records;
    for (const auto& r : records) {
      if (r.size_class == cls) class_records.push_back(r);
    }
    if (class_records.empty() && cls == SizeClass::LARGE) continue;

    auto rounds = group_rounds(class_records);
    result.rounds += rounds.size();
    auto kept = filter_synchronized(std::move(rounds), opt.max_skew_s);
    result.kept_rounds += kept.size();

    std::vector<persistence::LogRecord> singles;
    for (const auto& g : kept) {
      for (const auto* leg : g.legs) singles.push_back(*leg);
    }
    const auto ma =
        derive_multiaccess(kept, opt.client_timeout_s, opt.exec);

    std::set<std::string> link_ids;
    for (const auto& r : singles) link_ids.insert(r.txn.link_id);

    const std::string tag = lower(to_string(cls));

    // Mode partitions per protocol: pooled single-link ("all"), per link,
    // and the derived multi-access series.
    struct Series {
      std::string proto;
      std::string mode;
      std::vector<persistence::LogRecord> recs;
    };
    std::vector<Series> series;
    for (const Protocol proto : kAllProtocols) {
      Series pooled{to_string(proto), "all", {}};
      for (const auto& r : singles) {
        if (r.txn.protocol == proto) pooled.recs.push_back(r);
      }
      series.push_back(std::move(pooled));
      Series best{to_string(proto), multiaccess::kMultiAccessLinkId, {}};
      for (const auto& r : ma) {
        if (r.txn.protocol == proto) best.recs.push_back(r);
      }
      series.push_back(std::move(best));
      for (const auto& id : link_ids) {
        Series per{to_string(proto), id, {}};
        for (const auto& r : singles) {
          if (r.txn.protocol == proto && r.txn.link_id == id) {
            per.recs.push_back(r);
          }
        }
        series.push_back(std::move(per));
      }
    }

    // Transaction-time table.
    {
      const auto path = fs::path(out_dir) / ("summary_" + tag + ".tsv");
      TsvWriter w(path);
      w.row({"protocol", "mode", "attempted", "successful", "mean_s",
             "stddev_s", "median_s", "min_s", "q90_s", "max_s"});
      for (const auto& s : series) {
        w.row(summary_row(s.proto, s.mode, summarize(s.recs, opt.exec)));
      }
      result.files.push_back(path.string());
    }

    // Availability table.
    {
      const auto path = fs::path(out_dir) / ("availability_" + tag + ".tsv");
      TsvWriter w(path);
      w.row({"time_limit_s", "protocol", "mode", "attempted",
             "successful_within", "rate"});
      for (const double limit : opt.time_limits_s) {
        for (const auto& s : series) {
          const auto cell = availability(s.recs, limit, opt.exec);
          w.row({num(limit), s.proto, s.mode, std::to_string(cell.attempted),
                 std::to_string(cell.successful_within), num(cell.rate)});
        }
      }
      result.files.push_back(path.string());
    }

    // ECDF series.
    for (const auto& s : series) {
      if (s.recs.empty()) continue;
      const auto points = ecdf(s.recs, opt.exec);
      if (points.empty()) continue;
      const std::string mode_tag =
          s.mode == "all" || s.mode == multiaccess::kMultiAccessLinkId
              ? s.mode
              : "link_" + sanitize(s.mode);
      const auto path = fs::path(out_dir) /
                        ("ecdf_" + tag + "_" + s.proto + "_" + mode_tag +
                         ".tsv");
      TsvWriter w(path);
      w.row({"duration_s", "fraction"});
      for (const auto& p : points) w.row({num(p.duration_s), num(p.fraction)});
      result.files.push_back(path.string());
    }
  }

  // Run-level bookkeeping, including what was skipped.
  {
    const auto path = fs::path(out_dir) / "report_info.txt";
    std::ofstream info(path);
    info << "records\t" << result.records << "\n";
    info << "malformed_lines\t" << result.malformed_lines << "\n";
    info << "rounds\t" << result.rounds << "\n";
    info << "kept_rounds\t" << result.kept_rounds << "\n";
    info << "max_skew_s\t" << num(opt.max_skew_s) << "\n";
    result.files.push_back(path.string());
  }
  return result;
}

}  // namespace txbench::analysis
