// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

// txbench: multi-link transaction benchmark over real sockets or an emulated
// link layer. Subcommands: serve, run, emulate-run, analyze, fit-profile.

#include <csignal>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "txbench/analysis.hpp"
#include "txbench/fit.hpp"
#include "txbench/persistence.hpp"
#include "txbench/scheduler.hpp"
#include "txbench/server.hpp"
#include "txbench/sockets.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

struct LinkSpec {
  std::string link_id;
  std::string bind_ip;        // optional
  std::string metadata_path;  // optional
};

// "op0", "op0@10.0.0.5", "op0@10.0.0.5#meta.json", "op0#meta.json"
LinkSpec parse_link_spec(const std::string& s) {
  LinkSpec spec;
  std::string rest = s;
  const auto hash = rest.find('#');
  if (hash != std::string::npos) {
    spec.metadata_path = rest.substr(hash + 1);
    rest = rest.substr(0, hash);
  }
  const auto at = rest.find('@');
  if (at != std::string::npos) {
    spec.bind_ip = rest.substr(at + 1);
    rest = rest.substr(0, at);
  }
  spec.link_id = rest;
  return spec;
}

int cmd_serve(const std::string& host, uint16_t port, double stall,
              double teardown, const std::string& log_path) {
  txbench::server::ServerConfig cfg;
  cfg.bind_host = host;
  cfg.udp_port = port;
  cfg.tcp_port = port;
  cfg.secure_port = port == 0 ? 0 : static_cast<uint16_t>(port + 1);
  cfg.stall_timeout_s = stall;
  cfg.teardown_delay_s = teardown;
  cfg.log_path = log_path;
  txbench::server::Server server(cfg);
  server.start();
  std::printf("serving: udp/tcp %s:%u secure %s:%u (stall %.1fs)\n",
              host.c_str(), server.udp_port(), host.c_str(),
              server.secure_port(), stall);
  std::fflush(stdout);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) {
    struct timespec ts{0, 100 * 1000 * 1000};
    nanosleep(&ts, nullptr);
  }
  server.stop();
  std::printf("server stopped (%zu transactions logged)\n",
              server.log_snapshot().size());
  return 0;
}

int cmd_run(const std::string& server_spec, uint16_t secure_port,
            const std::vector<std::string>& link_specs,
            const std::string& out_path, double duration, double round_len,
            const double (&offsets)[3], const std::string& size, uint64_t seed,
            double timeout) {
  const auto colon = server_spec.rfind(':');
  if (colon == std::string::npos) {
    std::fprintf(stderr, "error: --server wants host:port\n");
    return 2;
  }
  txbench::sockets::ServerAddress addr;
  addr.host = server_spec.substr(0, colon);
  addr.udp_port =
      static_cast<uint16_t>(std::stoul(server_spec.substr(colon + 1)));
  addr.tcp_port = addr.udp_port;
  addr.secure_port = secure_port != 0
                         ? secure_port
                         : static_cast<uint16_t>(addr.udp_port + 1);

  txbench::sched::ExperimentConfig cfg;
  cfg.run_duration_s = duration;
  cfg.round_length_s = round_len;
  cfg.offset_udp_s = offsets[0];
  cfg.offset_tcp_s = offsets[1];
  cfg.offset_secure_s = offsets[2];
  cfg.seed = seed;
  cfg.transport.client_timeout_s = timeout;
  const auto sc = txbench::size_class_from_string(size);
  if (!sc) {
    std::fprintf(stderr, "error: --size wants small or large\n");
    return 2;
  }
  cfg.size_class = *sc;

  std::vector<std::unique_ptr<txbench::sockets::RealEndpoint>> endpoints;
  std::vector<txbench::net::LinkEndpoint*> links;
  for (const auto& s : link_specs) {
    const auto spec = parse_link_spec(s);
    std::optional<txbench::LinkMetadata> meta;
    if (!spec.metadata_path.empty()) {
      meta = txbench::sockets::load_metadata_file(spec.metadata_path);
    }
    endpoints.push_back(std::make_unique<txbench::sockets::RealEndpoint>(
        spec.link_id, addr, spec.bind_ip, meta));
    links.push_back(endpoints.back().get());
  }

  txbench::persistence::LogWriter writer(out_path);
  txbench::sockets::RealLegRunner runner;
  size_t count = 0;
  txbench::sched::run_experiment(
      cfg, runner, links, [&](const txbench::multiaccess::Round& round) {
        for (const auto& leg : round.legs) {
          txbench::persistence::LogRecord rec;
          rec.round_index = round.round_index;
          rec.start_skew_s = round.start_skew_s;
          rec.size_class = cfg.size_class;
          rec.txn = leg;
          writer.append(rec);
          ++count;
        }
      });
  std::printf("wrote %zu records to %s\n", count, out_path.c_str());
  return 0;
}

int cmd_emulate_run(const std::string& config_path, const std::string& out,
                    uint64_t seed, bool seed_set, const std::string& size,
                    bool realtime) {
  auto cfg = txbench::sched::EmuRunConfig::load(config_path);
  if (seed_set) cfg.experiment.seed = seed;
  if (!size.empty()) {
    const auto sc = txbench::size_class_from_string(size);
    if (!sc) {
      std::fprintf(stderr, "error: --size wants small or large\n");
      return 2;
    }
    cfg.experiment.size_class = *sc;
  }
  if (realtime) cfg.realtime = true;
  txbench::persistence::LogWriter writer(out);
  const size_t count = txbench::sched::run_emulated_experiment(cfg, writer);
  std::printf("wrote %zu records to %s\n", count, out.c_str());
  return 0;
}

int cmd_analyze(const std::string& log, const std::string& out_dir,
                double max_skew) {
  txbench::analysis::ReportOptions opt;
  opt.max_skew_s = max_skew;
  const auto res = txbench::analysis::write_report(log, out_dir, opt);
  std::printf("records %zu (malformed lines %zu), rounds %zu, kept %zu\n",
              res.records, res.malformed_lines, res.rounds, res.kept_rounds);
  for (const auto& f : res.files) std::printf("  %s\n", f.c_str());
  return 0;
}

int cmd_fit_profile(double median, double q90, double loss,
                    const std::string& out, uint64_t seed) {
  txbench::emu::FitOptions opt;
  opt.seed = seed;
  auto profile = txbench::emu::fit_profile_to_targets(median, q90, loss, opt);
  profile.save(out);
  std::printf("fitted profile written to %s\n", out.c_str());
  std::printf("%s\n", profile.to_json_string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-link transaction benchmark"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "run the upload server");
  std::string host = "127.0.0.1";
  uint16_t port = 9000;
  double stall = 5.0, teardown = 0.0;
  std::string server_log;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "UDP/TCP port (SECURE uses port+1)");
  serve->add_option("--stall-timeout", stall, "server stall timeout, seconds");
  serve->add_option("--teardown-delay", teardown,
                    "artificial close delay, seconds");
  serve->add_option("--log", server_log, "server-side transaction log (JSONL)");

  // run
  auto* run = app.add_subcommand("run", "real-socket measurement campaign");
  std::string server_spec = "127.0.0.1:9000";
  uint16_t secure_port = 0;
  std::vector<std::string> link_specs{"op0"};
  std::string out_path = "txbench_log.jsonl";
  double duration = 3600.0, round_len = 30.0;
  std::string size = "small";
  uint64_t seed = 1;
  double timeout = 6.0;
  run->add_option("--server", server_spec, "server host:port");
  run->add_option("--secure-port", secure_port,
                  "SECURE port (default: port+1)");
  run->add_option("--links", link_specs,
                  "link specs: id[@bind_ip][#metadata.json]")
      ->delimiter(',');
  run->add_option("--out", out_path, "output log path");
  run->add_option("--duration", duration, "run duration, seconds");
  run->add_option("--round", round_len, "round length, seconds");
  double offsets[3] = {10.0, 20.0, 30.0};
  run->add_option("--offset-udp", offsets[0], "UDP round offset, seconds");
  run->add_option("--offset-tcp", offsets[1], "TCP round offset, seconds");
  run->add_option("--offset-secure", offsets[2],
                  "SECURE round offset, seconds");
  run->add_option("--size", size, "message size class: small|large");
  run->add_option("--seed", seed, "campaign seed");
  run->add_option("--timeout", timeout, "client timeout, seconds");

  // emulate-run
  auto* emu = app.add_subcommand("emulate-run", "emulated campaign");
  std::string config_path;
  std::string emu_out = "txbench_log.jsonl";
  uint64_t emu_seed = 0;
  bool realtime = false;
  emu->add_option("--config", config_path, "campaign config JSON")->required();
  emu->add_option("--out", emu_out, "output log path");
  auto* seed_opt = emu->add_option("--seed", emu_seed, "override config seed");
  std::string emu_size;
  emu->add_option("--size", emu_size, "override message size class");
  emu->add_flag("--realtime", realtime,
                "play the emulation against the wall clock");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "metrics report from a log");
  std::string log_path;
  std::string report_dir = "report";
  double max_skew = 0.010;
  analyze->add_option("--log", log_path, "transaction log (JSONL)")->required();
  analyze->add_option("--out", report_dir, "report output directory");
  analyze->add_option("--max-skew", max_skew,
                      "synchronization filter threshold, seconds");

  // fit-profile
  auto* fit = app.add_subcommand("fit-profile",
                                 "calibrate a link profile to target quantiles");
  double median = 0.135, q90 = 0.643, loss = 0.047;
  std::string fit_out = "profile.json";
  uint64_t fit_seed = 1;
  fit->add_option("--median", median, "target UDP transaction median, seconds");
  fit->add_option("--q90", q90, "target 90% quantile, seconds");
  fit->add_option("--loss", loss, "target transaction failure probability");
  fit->add_option("--out", fit_out, "output profile path");
  fit->add_option("--seed", fit_seed, "calibration seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      return cmd_serve(host, port, stall, teardown, server_log);
    }
    if (run->parsed()) {
      return cmd_run(server_spec, secure_port, link_specs, out_path, duration,
                     round_len, offsets, size, seed, timeout);
    }
    if (emu->parsed()) {
      return cmd_emulate_run(config_path, emu_out, emu_seed,
                             seed_opt->count() > 0, emu_size, realtime);
    }
    if (analyze->parsed()) {
      return cmd_analyze(log_path, report_dir, max_skew);
    }
    if (fit->parsed()) {
      return cmd_fit_profile(median, q90, loss, fit_out, fit_seed);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
