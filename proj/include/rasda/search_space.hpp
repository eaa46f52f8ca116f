// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rasda/prng.hpp"
#include "rasda/strings.hpp"

namespace rasda {

// Sampled log-uniformly on [lo, hi]; lo must be positive.
struct LogFloatRange {
  double lo = 0;
  double hi = 0;
};

// Sampled uniformly on [lo, hi].
struct FloatRange {
  double lo = 0;
  double hi = 0;
};

struct IntChoice {
  std::vector<std::int64_t> values;
};

struct Categorical {
  std::vector<std::string> values;
};

struct ParamSpec {
  std::string name;
  std::variant<LogFloatRange, FloatRange, IntChoice, Categorical> kind;

  void validate() const {
    if (name.empty()) throw std::invalid_argument("parameter name is empty");
    if (auto* lf = std::get_if<LogFloatRange>(&kind)) {
      if (!(lf->lo > 0)) throw std::invalid_argument(name + ": log range needs lo > 0");
      if (!(lf->lo < lf->hi)) throw std::invalid_argument(name + ": needs lo < hi");
    } else if (auto* f = std::get_if<FloatRange>(&kind)) {
      if (!(f->lo < f->hi)) throw std::invalid_argument(name + ": needs lo < hi");
    } else if (auto* ic = std::get_if<IntChoice>(&kind)) {
      if (ic->values.empty()) throw std::invalid_argument(name + ": empty choice list");
      std::set<std::int64_t> uniq(ic->values.begin(), ic->values.end());
      if (uniq.size() != ic->values.size())
        throw std::invalid_argument(name + ": duplicate choices");
    } else if (auto* c = std::get_if<Categorical>(&kind)) {
      if (c->values.empty()) throw std::invalid_argument(name + ": empty category list");
      std::set<std::string> uniq(c->values.begin(), c->values.end());
      if (uniq.size() != c->values.size())
        throw std::invalid_argument(name + ": duplicate categories");
    }
  }
};

// Tagged scalar so event logs and configs can round-trip values textually.
using ParamValue = std::variant<double, std::int64_t, std::string>;

inline std::string param_value_text(const ParamValue& v) {
  if (auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

// One sampled point of the search space: parameter name -> value. Keys are
// kept sorted so the canonical form (and thus the stable hash) is unique.
struct Configuration {
  std::map<std::string, ParamValue> values;

  bool has(const std::string& name) const { return values.count(name) != 0; }

  double number(const std::string& name) const {
    const ParamValue& v = values.at(name);
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw std::invalid_argument("parameter '" + name + "' is not numeric");
  }

  std::int64_t integer(const std::string& name) const {
    return std::get<std::int64_t>(values.at(name));
  }

  const std::string& str(const std::string& name) const {
    return std::get<std::string>(values.at(name));
  }

  // "name=value;name=value;..." with shortest round-trip floats. This exact
  // string feeds the FNV-1a fingerprint, so it is part of the stable format.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values) {
      out += k;
      out += '=';
      out += param_value_text(v);
      out += ';';
    }
    return out;
  }
};

// Stable 64-bit fingerprint of a configuration: FNV-1a over canonical().
inline std::uint64_t config_hash(const Configuration& c) {
  return fnv1a(c.canonical());
}

inline Configuration sample_configuration(const std::vector<ParamSpec>& space,
                                          SplitMix64& rng) {
  Configuration cfg;
  for (const ParamSpec& p : space) {
    p.validate();
    if (auto* lf = std::get_if<LogFloatRange>(&p.kind)) {
      double v = std::exp(rng.uniform(std::log(lf->lo), std::log(lf->hi)));
      cfg.values[p.name] = std::clamp(v, lf->lo, lf->hi);
    } else if (auto* f = std::get_if<FloatRange>(&p.kind)) {
      cfg.values[p.name] = rng.uniform(f->lo, f->hi);
    } else if (auto* ic = std::get_if<IntChoice>(&p.kind)) {
      cfg.values[p.name] = ic->values[rng.below(ic->values.size())];
    } else {
      auto& c = std::get<Categorical>(p.kind);
      cfg.values[p.name] = c.values[rng.below(c.values.size())];
    }
  }
  return cfg;
}

// Checks the Configuration invariants: keys match the space exactly and
// every value lies inside its parameter's domain.
inline void validate_configuration(const std::vector<ParamSpec>& space,
                                   const Configuration& cfg) {
  if (cfg.values.size() != space.size())
    throw std::invalid_argument("configuration keys do not match search space");
  for (const ParamSpec& p : space) {
    auto it = cfg.values.find(p.name);
    if (it == cfg.values.end())
      throw std::invalid_argument("missing parameter '" + p.name + "'");
    const ParamValue& v = it->second;
    if (auto* lf = std::get_if<LogFloatRange>(&p.kind)) {
      double d = std::get<double>(v);
      if (d < lf->lo || d > lf->hi) throw std::invalid_argument(p.name + " out of range");
    } else if (auto* f = std::get_if<FloatRange>(&p.kind)) {
      double d = std::get<double>(v);
      if (d < f->lo || d > f->hi) throw std::invalid_argument(p.name + " out of range");
    } else if (auto* ic = std::get_if<IntChoice>(&p.kind)) {
      std::int64_t i = std::get<std::int64_t>(v);
      if (std::find(ic->values.begin(), ic->values.end(), i) == ic->values.end())
        throw std::invalid_argument(p.name + " not in choice list");
    } else {
      auto& c = std::get<Categorical>(p.kind);
      const std::string& s = std::get<std::string>(v);
      if (std::find(c.values.begin(), c.values.end(), s) == c.values.end())
        throw std::invalid_argument(p.name + " not in category list");
    }
  }
}

}  // namespace rasda
