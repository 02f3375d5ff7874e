// Copyright (c) the txbench authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.

#include <algorithm>
#include <fstream>

#include "txbench/emulator.hpp"

#include <nlohmann/json.hpp>

namespace txbench::emu {

using nlohmann::json;

void LatencyMixture::validate() const {
  if (components.empty()) {
    throw ValidationError("mixture needs at least one component");
  }
  double sum = 0.0;
  for (const auto& c : components) {
    if (c.weight < 0.0) throw ValidationError("component weight < 0");
    if (c.median_s <= 0.0) throw ValidationError("component median must be > 0");
    if (c.sigma_log < 0.0) throw ValidationError("component sigma must be >= 0");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("mixture weights must sum to 1");
  }
}

size_t LatencyMixture::fastest_component() const {
  size_t best = 0;
  for (size_t i = 1; i < components.size(); ++i) {
    if (components[i].median_s < components[best].median_s) best = i;
  }
  return best;
}

double sample_one_way_delay(const LatencyMixture& mix, Rng& rng,
                            size_t* component_out) {
  // Fixed draw accounting: one uniform for the component, two for the normal.
  const double u = rng.u01();
  double acc = 0.0;
  size_t idx = mix.components.size() - 1;
  for (size_t i = 0; i < mix.components.size(); ++i) {
    acc += mix.components[i].weight;
    if (u < acc) {
      idx = i;
      break;
    }
  }
  const auto& c = mix.components[idx];
  const double z = rng.normal();
  if (component_out) *component_out = idx;
  return c.median_s * std::exp(c.sigma_log * z);
}

double sample_one_way_delay(const LatencyMixture& mix, Rng& rng) {
  return sample_one_way_delay(mix, rng, nullptr);
}

void LinkProfile::validate() const {
  if (link_id.empty()) throw ValidationError("profile needs a link_id");
  mixture.validate();
  if (loss_rate < 0.0 || loss_rate > 1.0) {
    throw ValidationError("loss_rate out of [0, 1]");
  }
  if (bandwidth_bytes_per_s && *bandwidth_bytes_per_s <= 0.0) {
    throw ValidationError("bandwidth cap must be > 0");
  }
  auto sorted = outages;
  std::sort(sorted.begin(), sorted.end(),
            [](const OutageWindow& a, const OutageWindow& b) {
              return a.start_s < b.start_s;
            });
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].duration_s < 0.0) {
      throw ValidationError("outage duration must be >= 0");
    }
    if (i > 0 &&
        sorted[i].start_s < sorted[i - 1].start_s + sorted[i - 1].duration_s) {
      throw ValidationError("outage windows overlap");
    }
  }
}

bool LinkProfile::in_outage(double at_s) const {
  for (const auto& w : outages) {
    if (at_s >= w.start_s && at_s < w.start_s + w.duration_s) return true;
  }
  return false;
}

TransmitOutcome transmit(const LinkProfile& profile, Rng& rng,
                         uint64_t data_ordinal, size_t bytes, double at_s) {
  TransmitOutcome out;
  // Draw loss and delay unconditionally so the stream stays aligned no matter
  // what the packet's fate is.
  const double loss_u = rng.u01();
  const double delay = sample_one_way_delay(profile.mixture, rng, &out.component);

  bool dropped = loss_u < profile.loss_rate;
  if (profile.in_outage(at_s)) dropped = true;
  if (data_ordinal != 0 &&
      std::find(profile.scripted_drops.begin(), profile.scripted_drops.end(),
                data_ordinal) != profile.scripted_drops.end()) {
    dropped = true;
  }
  if (dropped) return out;

  double serialization = 0.0;
  if (profile.bandwidth_bytes_per_s) {
    serialization = static_cast<double>(bytes) / *profile.bandwidth_bytes_per_s;
  }
  out.delivered = true;
  out.deliver_at_s = at_s + delay + serialization;
  return out;
}

namespace {

json mixture_to_json(const LatencyMixture& m) {
  json comps = json::array();
  for (const auto& c : m.components) {
    comps.push_back({{"weight", c.weight},
                     {"median_s", c.median_s},
                     {"sigma_log", c.sigma_log}});
  }
  return json{{"components", comps}};
}

LatencyMixture mixture_from_json(const json& j) {
  LatencyMixture m;
  for (const auto& c : j.at("components")) {
    m.components.push_back(MixtureComponent{c.at("weight").get<double>(),
                                            c.at("median_s").get<double>(),
                                            c.at("sigma_log").get<double>()});
  }
  return m;
}

}  // namespace

std::string LinkProfile::to_json_string(int indent) const {
  json j;
  j["link_id"] = link_id;
  j["mixture"] = mixture_to_json(mixture);
  j["loss_rate"] = loss_rate;
  json outs = json::array();
  for (const auto& w : outages) {
    outs.push_back({{"start_s", w.start_s}, {"duration_s", w.duration_s}});
  }
  j["outages"] = outs;
  if (bandwidth_bytes_per_s) j["bandwidth_bytes_per_s"] = *bandwidth_bytes_per_s;
  j["rng_seed"] = rng_seed;
  if (!scripted_drops.empty()) j["scripted_drops"] = scripted_drops;
  return j.dump(indent);
}

LinkProfile LinkProfile::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("profile JSON parse error: ") + e.what());
  }
  LinkProfile p;
  try {
    p.link_id = j.at("link_id").get<std::string>();
    p.mixture = mixture_from_json(j.at("mixture"));
    p.loss_rate = j.value("loss_rate", 0.0);
    if (j.contains("outages")) {
      for (const auto& w : j["outages"]) {
        p.outages.push_back(OutageWindow{w.at("start_s").get<double>(),
                                         w.at("duration_s").get<double>()});
      }
    }
    if (j.contains("bandwidth_bytes_per_s") &&
        !j["bandwidth_bytes_per_s"].is_null()) {
      p.bandwidth_bytes_per_s = j["bandwidth_bytes_per_s"].get<double>();
    }
    p.rng_seed = j.value("rng_seed", uint64_t{0});
    if (j.contains("scripted_drops")) {
      p.scripted_drops = j["scripted_drops"].get<std::vector<uint64_t>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("profile JSON field error: ") + e.what());
  }
  p.validate();
  return p;
}

LinkProfile LinkProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void LinkProfile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write profile file: " + path);
  out << to_json_string() << "\n";
  if (!out) throw IoError("failed writing profile file: " + path);
}

}  // namespace txbench::emu
