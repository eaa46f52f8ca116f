// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasda/backends.hpp"
#include "rasda/cluster_sim.hpp"
#include "rasda/strings.hpp"

namespace rasda {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment description. Canonical encoding is flat `key = value` text
// (one pair per line, `#` comments); a flat JSON object with the same keys
// is accepted as an alternate encoding. Unknown keys are rejected.
struct ExperimentConfig {
  std::vector<Policy> policies;  // from `policy = asha | rasda | both`
  std::string backend = "sim";   // sim | toy
  MetricMode metric_mode = MetricMode::Minimize;
  int trials = 0;
  int total_workers = 0;
  int base_resources = 0;
  int min_t = 0, max_t = 0, sf = 2, rf = 2;
  std::vector<std::uint64_t> seeds;
  int bs_local = 0;
  double runtime_hetero = 0.0;
  RuntimeModel runtime;
  CheckpointModel checkpoint;
  DynamicsModel dynamics;
  ToyProblemConfig toy;
  std::vector<ParamSpec> space;

  RungLadder ladder() const { return compute_ladder(min_t, max_t, sf, rf); }

  SimParams sim_params(Policy policy, std::uint64_t seed) const {
    SimParams p;
    p.policy = policy;
    p.metric_mode = metric_mode;
    p.num_trials = trials;
    p.total_workers = total_workers;
    p.base_resources = base_resources;
    p.ladder = ladder();
    p.runtime = runtime;
    p.checkpoint = checkpoint;
    p.bs_local = bs_local;
    p.seed = seed;
    p.backend_name = backend;
    return p;
  }

  // Trial configurations for one seed. The stream depends only on the seed,
  // never on the policy, so ASHA and RASDA compare identical candidates.
  std::vector<Configuration> sample_trial_configs(std::uint64_t seed) const {
    SplitMix64 rng(mix_seed(seed, fnv1a("trial-configs")));
    std::vector<Configuration> configs;
    configs.reserve(trials);
    for (int i = 0; i < trials; ++i) configs.push_back(sample_configuration(space, rng));
    return configs;
  }
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
  size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline ParamSpec parse_param_spec(const std::string& name, const std::string& value) {
  std::istringstream in(value);
  std::string kind;
  in >> kind;
  std::string rest;
  std::getline(in, rest);
  ParamSpec p;
  p.name = name;
  if (kind == "logfloat" || kind == "float") {
    auto parts = split(trim(rest), ' ');
    std::vector<std::string> nums;
    for (auto& s : parts)
      if (!s.empty()) nums.push_back(s);
    if (nums.size() != 2)
      throw ConfigError("param." + name + ": expected '" + kind + " <lo> <hi>'");
    if (kind == "logfloat")
      p.kind = LogFloatRange{parse_double(nums[0]), parse_double(nums[1])};
    else
      p.kind = FloatRange{parse_double(nums[0]), parse_double(nums[1])};
  } else if (kind == "intchoice") {
    IntChoice c;
    for (auto& s : split(trim(rest), ',')) c.values.push_back(parse_int(s));
    p.kind = c;
  } else if (kind == "categorical") {
    Categorical c;
    c.values = split(trim(rest), ',');
    p.kind = c;
  } else {
    throw ConfigError("param." + name + ": unknown kind '" + kind + "'");
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("param.") + name + ": " + e.what());
  }
  return p;
}

// Both encodings funnel into ordered key/value text pairs.
inline std::vector<std::pair<std::string, std::string>> flatten(const std::string& text,
                                                                const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> entries;
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(origin + ": bad JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": JSON config must be an object");
    for (auto& [key, value] : j.items()) {
      std::string out;
      if (value.is_string()) {
        out = value.get<std::string>();
      } else if (value.is_number_integer()) {
        out = std::to_string(value.get<std::int64_t>());
      } else if (value.is_number()) {
        out = format_double(value.get<double>());
      } else if (value.is_array()) {
        for (size_t i = 0; i < value.size(); ++i) {
          if (i) out += ',';
          if (value[i].is_string())
            out += value[i].get<std::string>();
          else if (value[i].is_number_integer())
            out += std::to_string(value[i].get<std::int64_t>());
          else if (value[i].is_number())
            out += format_double(value[i].get<double>());
          else
            throw ConfigError(origin + ": unsupported array element for key '" + key + "'");
        }
      } else {
        throw ConfigError(origin + ": unsupported value type for key '" + key + "'");
      }
      entries.emplace_back(key, out);
    }
    return entries;
  }

  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped(trim(strip_comment(line)));
    if (stripped.empty()) continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key(trim(stripped.substr(0, eq)));
    std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const std::string& text,
                                                const std::string& origin) {
  ExperimentConfig cfg;
  // Schema defaults that differ from the struct defaults.
  cfg.checkpoint = CheckpointModel{5, 5.0, 30.0};

  std::map<std::string, bool> seen;
  std::map<std::string, bool> required = {
      {"policy", false},  {"backend", false},        {"metric_mode", false},
      {"trials", false},  {"total_workers", false},  {"base_resources", false},
      {"min_t", false},   {"max_t", false},          {"sf", false},
      {"rf", false},      {"seeds", false},          {"bs_local", false},
  };

  auto as_int = [&](const std::string& k, const std::string& v) {
    try {
      return static_cast<int>(parse_int(v));
    } catch (const std::exception&) {
      throw ConfigError(origin + ": key '" + k + "' needs an integer, got '" + v + "'");
    }
  };
  auto as_double = [&](const std::string& k, const std::string& v) {
    try {
      return parse_double(v);
    } catch (const std::exception&) {
      throw ConfigError(origin + ": key '" + k + "' needs a number, got '" + v + "'");
    }
  };

  for (auto& [key, value] : detail::flatten(text, origin)) {
    if (seen[key]) throw ConfigError(origin + ": duplicate key '" + key + "'");
    seen[key] = true;
    if (required.count(key)) required[key] = true;

    if (key == "policy") {
      if (value == "asha") cfg.policies = {Policy::Asha};
      else if (value == "rasda") cfg.policies = {Policy::Rasda};
      else if (value == "both") cfg.policies = {Policy::Asha, Policy::Rasda};
      else throw ConfigError(origin + ": policy must be asha, rasda or both");
    } else if (key == "backend") {
      if (value != "sim" && value != "toy")
        throw ConfigError(origin + ": backend must be sim or toy");
      cfg.backend = value;
    } else if (key == "metric_mode") {
      if (value == "min") cfg.metric_mode = MetricMode::Minimize;
      else if (value == "max") cfg.metric_mode = MetricMode::Maximize;
      else throw ConfigError(origin + ": metric_mode must be min or max");
    } else if (key == "trials") {
      cfg.trials = as_int(key, value);
    } else if (key == "total_workers") {
      cfg.total_workers = as_int(key, value);
    } else if (key == "base_resources") {
      cfg.base_resources = as_int(key, value);
    } else if (key == "min_t") {
      cfg.min_t = as_int(key, value);
    } else if (key == "max_t") {
      cfg.max_t = as_int(key, value);
    } else if (key == "sf") {
      cfg.sf = as_int(key, value);
    } else if (key == "rf") {
      cfg.rf = as_int(key, value);
    } else if (key == "seeds") {
      for (auto& s : split(value, ','))
        cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int(s)));
    } else if (key == "bs_local") {
      cfg.bs_local = as_int(key, value);
    } else if (key == "rt.dataset_samples") {
      cfg.runtime.dataset_samples = parse_int(value);
    } else if (key == "rt.per_sample_time") {
      cfg.runtime.per_sample_time = as_double(key, value);
    } else if (key == "rt.fixed_overhead") {
      cfg.runtime.fixed_overhead = as_double(key, value);
    } else if (key == "rt.comm_coeff") {
      cfg.runtime.comm_coeff = as_double(key, value);
    } else if (key == "ckpt.every") {
      cfg.checkpoint.checkpoint_every = as_int(key, value);
    } else if (key == "ckpt.cost") {
      cfg.checkpoint.checkpoint_cost = as_double(key, value);
    } else if (key == "ckpt.relaunch") {
      cfg.checkpoint.relaunch_cost = as_double(key, value);
    } else if (key == "dyn.b0") {
      cfg.dynamics.b0 = as_double(key, value);
    } else if (key == "dyn.growth") {
      cfg.dynamics.growth = as_double(key, value);
    } else if (key == "dyn.bs_ref") {
      cfg.dynamics.bs_ref = as_double(key, value);
    } else if (key == "dyn.noise") {
      cfg.dynamics.noise = as_double(key, value);
    } else if (key == "dyn.bowl_width") {
      cfg.dynamics.bowl_width = as_double(key, value);
    } else if (key == "dyn.base_rate") {
      cfg.dynamics.base_rate = as_double(key, value);
    } else if (key == "toy.samples") {
      cfg.toy.n_samples = as_int(key, value);
    } else if (key == "toy.features") {
      cfg.toy.n_features = as_int(key, value);
    } else if (key == "toy.val_samples") {
      cfg.toy.val_samples = as_int(key, value);
    } else if (key == "toy.noise") {
      cfg.toy.noise_std = as_double(key, value);
    } else if (key == "toy.kind") {
      cfg.toy.kind = value;
    } else if (key.rfind("param.", 0) == 0) {
      std::string name = key.substr(6);
      cfg.space.push_back(detail::parse_param_spec(name, value));
    } else {
      throw ConfigError(origin + ": unknown key '" + key + "'");
    }
  }

  for (auto& [key, present] : required)
    if (!present) throw ConfigError(origin + ": missing required key '" + key + "'");

  try {
    RungLadder ladder = cfg.ladder();
    (void)ladder;
    cfg.runtime.validate();
    cfg.checkpoint.validate();
    cfg.toy.validate();
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (cfg.base_resources < 1) throw std::invalid_argument("base_resources must be >= 1");
    if (cfg.total_workers < cfg.base_resources)
      throw std::invalid_argument("total_workers must be >= base_resources");
    if (cfg.bs_local < 1) throw std::invalid_argument("bs_local must be >= 1");
    if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed required");
    if (cfg.space.empty()) throw std::invalid_argument("search space is empty");
    if (cfg.backend == "toy") {
      bool has_lr = false;
      for (auto& p : cfg.space) has_lr |= p.name == "lr";
      if (!has_lr) throw std::invalid_argument("toy backend requires param.lr");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

}  // namespace rasda
