// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include "txbench/scheduler.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace txbench::sched {

using nlohmann::json;

void ExperimentConfig::validate() const {
  transport.validate();
  if (run_duration_s <= 0.0 || round_length_s <= 0.0) {
    throw ValidationError("durations must be positive");
  }
  const double rounds = run_duration_s / round_length_s;
  if (std::abs(rounds - std::round(rounds)) > 1e-9) {
    throw ValidationError("run_duration must be divisible by round_length");
  }
  const double offs[] = {offset_udp_s, offset_tcp_s, offset_secure_s};
  for (int i = 0; i < 3; ++i) {
    if (offs[i] > round_length_s) {
      throw ValidationError("protocol offsets must not exceed round_length");
    }
    if (i > 0 && offs[i] <= offs[i - 1]) {
      throw ValidationError("protocol offsets must be strictly increasing");
    }
  }
  if (skew_injection.fraction < 0.0 || skew_injection.fraction > 1.0) {
    throw ValidationError("skew fraction out of [0, 1]");
  }
}

double ExperimentConfig::protocol_offset(Protocol p) const {
  switch (p) {
    case Protocol::UDP:
      return offset_udp_s;
    case Protocol::TCP:
      return offset_tcp_s;
    case Protocol::SECURE:
      return offset_secure_s;
  }
  return offset_udp_s;
}

message::WarningEvent default_event(uint64_t seed) {
  message::WarningEvent e;
  e.event_id = "EVT-" + std::to_string(seed);
  e.event_type = message::EventType::VehicleObstruction;
  e.timestamp_ms = 1700000000000ull;
  e.latitude = 59.4022;  // Karlstad-ish
  e.longitude = 13.5115;
  return e;
}

LinkMetadata collect_metadata(net::LinkEndpoint& ep) {
  auto m = ep.sample_metadata();
  if (m.link_id.empty()) m.link_id = ep.link_id();
  if (m.sampled_at_ms == 0) m.sampled_at_ms = ep.wall_ms();
  return m;
}

std::vector<bool> skew_schedule(uint64_t seed, int proto_index,
                                uint64_t rounds, double fraction) {
  std::vector<bool> out(rounds, false);
  const auto want = static_cast<uint64_t>(fraction * static_cast<double>(rounds));
  if (want == 0) return out;
  std::vector<uint64_t> idx(rounds);
  for (uint64_t i = 0; i < rounds; ++i) idx[i] = i;
  emu::Rng rng(derive_seed(seed, 0x534b4557u, static_cast<uint64_t>(proto_index)));
  for (uint64_t i = rounds - 1; i > 0; --i) {
    const auto j = static_cast<uint64_t>(rng.u01() * static_cast<double>(i + 1));
    std::swap(idx[i], idx[j > i ? i : j]);
  }
  for (uint64_t k = 0; k < want && k < rounds; ++k) out[idx[k]] = true;
  return out;
}

void run_experiment(const ExperimentConfig& cfg, net::LegRunner& runner,
                    std::vector<net::LinkEndpoint*> links,
                    const RoundSink& sink) {
  cfg.validate();

  // Drop links that cannot even open a socket; keep going with the rest.
  std::vector<net::LinkEndpoint*> usable;
  for (auto* ep : links) {
    if (ep && ep->open_datagram() != nullptr) {
      usable.push_back(ep);
    } else if (ep) {
      std::fprintf(stderr, "warning: link %s unusable at start, skipping\n",
                   ep->link_id().c_str());
    }
  }
  if (usable.empty()) throw ValidationError("no usable links");

  const uint64_t rounds = cfg.round_count();
  const uint64_t n_links = usable.size();
  const auto msg =
      message::build_warning_message(default_event(cfg.seed), cfg.size_class);

  std::vector<bool> skewed[3];
  for (int p = 0; p < 3; ++p) {
    skewed[p] =
        skew_schedule(cfg.seed, p, rounds, cfg.skew_injection.fraction);
  }

  const double origin = runner.now();
  for (uint64_t r = 0; r < rounds; ++r) {
    for (int p = 0; p < 3; ++p) {
      const Protocol proto = kAllProtocols[p];
      const double at = origin + static_cast<double>(r) * cfg.round_length_s +
                        cfg.protocol_offset(proto);
      runner.sleep_until(at);

      std::vector<double> delays(n_links, 0.0);
      const bool inject = skewed[p][r];
      if (inject && n_links > 0) {
        delays.back() = cfg.skew_injection.skew_s;
      }
      const uint64_t txn_base =
          (r * 3ull + static_cast<uint64_t>(p)) * n_links + 1;
      auto round = multiaccess::run_round(runner, usable, msg, cfg.transport,
                                          proto, r, txn_base,
                                          inject ? &delays : nullptr);
      sink(round);
    }
  }
}

// ---------------------------------------------------------------------------
// Emulated campaign config + glue
// ---------------------------------------------------------------------------

namespace {

TransportConfig transport_from_json(const json& j) {
  TransportConfig t;
  t.client_timeout_s = j.value("client_timeout_s", t.client_timeout_s);
  t.server_stall_timeout_s =
      j.value("server_stall_timeout_s", t.server_stall_timeout_s);
  t.udp_payload_bytes = j.value("udp_payload_bytes", t.udp_payload_bytes);
  t.teardown_delay_s = j.value("teardown_delay_s", t.teardown_delay_s);
  return t;
}

json transport_to_json(const TransportConfig& t) {
  return json{{"client_timeout_s", t.client_timeout_s},
              {"server_stall_timeout_s", t.server_stall_timeout_s},
              {"udp_payload_bytes", t.udp_payload_bytes},
              {"teardown_delay_s", t.teardown_delay_s}};
}

}  // namespace

EmuRunConfig EmuRunConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config JSON parse error: ") + e.what());
  }
  EmuRunConfig cfg;
  auto& e = cfg.experiment;
  e.run_duration_s = j.value("run_duration_s", e.run_duration_s);
  e.round_length_s = j.value("round_length_s", e.round_length_s);
  if (j.contains("offsets")) {
    const auto& o = j["offsets"];
    e.offset_udp_s = o.value("UDP", e.offset_udp_s);
    e.offset_tcp_s = o.value("TCP", e.offset_tcp_s);
    e.offset_secure_s = o.value("SECURE", e.offset_secure_s);
  }
  if (j.contains("size_class")) {
    const auto sc = size_class_from_string(j["size_class"].get<std::string>());
    if (!sc) throw ValidationError("bad size_class in config");
    e.size_class = *sc;
  }
  e.seed = j.value("seed", e.seed);
  if (j.contains("transport")) e.transport = transport_from_json(j["transport"]);
  if (j.contains("skew_injection")) {
    e.skew_injection.fraction =
        j["skew_injection"].value("fraction", e.skew_injection.fraction);
    e.skew_injection.skew_s =
        j["skew_injection"].value("skew_s", e.skew_injection.skew_s);
  }
  cfg.realtime = j.value("realtime", false);
  if (!j.contains("links") || !j["links"].is_array() || j["links"].empty()) {
    throw ValidationError("config needs a non-empty links array");
  }
  for (const auto& l : j["links"]) {
    cfg.links.push_back(emu::LinkProfile::from_json_string(l.dump()));
  }
  e.validate();
  return cfg;
}

EmuRunConfig EmuRunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

std::string EmuRunConfig::to_json_string(int indent) const {
  const auto& e = experiment;
  json j;
  j["run_duration_s"] = e.run_duration_s;
  j["round_length_s"] = e.round_length_s;
  j["offsets"] = {{"UDP", e.offset_udp_s},
                  {"TCP", e.offset_tcp_s},
                  {"SECURE", e.offset_secure_s}};
  j["size_class"] = to_string(e.size_class);
  j["seed"] = e.seed;
  j["transport"] = transport_to_json(e.transport);
  j["skew_injection"] = {{"fraction", e.skew_injection.fraction},
                         {"skew_s", e.skew_injection.skew_s}};
  j["realtime"] = realtime;
  json links = json::array();
  for (const auto& p : this->links) links.push_back(json::parse(p.to_json_string()));
  j["links"] = links;
  return j.dump(indent);
}

size_t run_emulated_experiment(const EmuRunConfig& cfg,
                               persistence::LogWriter& writer) {
  cfg.experiment.validate();
  emu::World world(cfg.realtime ? emu::World::Mode::RealTime
                                : emu::World::Mode::Virtual);
  emu::Network network(world, cfg.experiment.transport);

  std::vector<net::LinkEndpoint*> eps;
  for (size_t i = 0; i < cfg.links.size(); ++i) {
    auto profile = cfg.links[i];
    if (profile.rng_seed == 0) {
      profile.rng_seed = derive_seed(cfg.experiment.seed, 0x4c494e4bu, i);
    }
    eps.push_back(&network.attach(profile));
  }

  emu::ActorScope scope(world);
  emu::EmuLegRunner runner(world);
  size_t count = 0;
  run_experiment(cfg.experiment, runner, eps,
                 [&](const multiaccess::Round& round) {
                   for (const auto& leg : round.legs) {
                     persistence::LogRecord rec;
                     rec.round_index = round.round_index;
                     rec.start_skew_s = round.start_skew_s;
                     rec.size_class = cfg.experiment.size_class;
                     rec.txn = leg;
                     writer.append(rec);
                     ++count;
                   }
                 });
  return count;
}

}  // namespace txbench::sched
