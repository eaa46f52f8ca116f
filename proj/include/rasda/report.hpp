// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rasda/cluster_sim.hpp"
#include "rasda/strings.hpp"

namespace rasda {

inline void write_summary_csv(const std::vector<SimSummary>& rows, std::ostream& os) {
  os << "policy,seed,trials,workers,makespan_s,best_metric,total_worker_seconds\n";
  for (const SimSummary& r : rows) {
    os << r.policy << ',' << r.seed << ',' << r.trials << ',' << r.workers << ','
       << format_double(r.makespan_s) << ',' << format_double(r.best_metric) << ','
       << format_double(r.total_worker_seconds) << '\n';
  }
}

inline std::vector<SimSummary> read_summary_csv(std::istream& is) {
  std::vector<SimSummary> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  if (trim(line) != "policy,seed,trials,workers,makespan_s,best_metric,total_worker_seconds")
    throw std::runtime_error("unrecognized summary header: " + line);
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 7)
      throw std::runtime_error("summary line " + std::to_string(lineno) + ": bad field count");
    SimSummary r;
    r.policy = f[0];
    r.seed = static_cast<std::uint64_t>(parse_int(f[1]));
    r.trials = static_cast<int>(parse_int(f[2]));
    r.workers = static_cast<int>(parse_int(f[3]));
    r.makespan_s = parse_double(f[4]);
    r.best_metric = parse_double(f[5]);
    r.total_worker_seconds = parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Aggregated ASHA-vs-RASDA view of a set of summary rows. Diff factors
// follow the convention "larger favors RASDA": runtime as asha/rasda, best
// metric oriented by the metric mode.
struct ComparisonReport {
  std::vector<std::uint64_t> seeds;
  std::map<std::uint64_t, SimSummary> asha;
  std::map<std::uint64_t, SimSummary> rasda;
  double mean_makespan_asha = 0;
  double mean_makespan_rasda = 0;
  double mean_best_asha = 0;
  double mean_best_rasda = 0;
  double speed_up = 0;       // mean makespan asha / mean makespan rasda
  double quality_ratio = 0;  // oriented so > 1 means rasda found a better metric
};

inline ComparisonReport build_comparison(const std::vector<SimSummary>& rows,
                                         MetricMode mode) {
  ComparisonReport rep;
  for (const SimSummary& r : rows) {
    auto& side = r.policy == "asha" ? rep.asha
               : r.policy == "rasda" ? rep.rasda
               : throw std::runtime_error("unknown policy in summary: " + r.policy);
    if (!side.emplace(r.seed, r).second)
      throw std::runtime_error("duplicate summary row for policy " + r.policy);
  }
  if (rep.asha.size() != rep.rasda.size() || rep.asha.empty())
    throw std::runtime_error("comparison needs matching asha/rasda rows per seed");
  double ma = 0, mr = 0, ba = 0, br = 0;
  for (auto& [seed, row] : rep.asha) {
    if (!rep.rasda.count(seed))
      throw std::runtime_error("missing rasda row for seed " + std::to_string(seed));
    rep.seeds.push_back(seed);
    ma += row.makespan_s;
    ba += row.best_metric;
    mr += rep.rasda.at(seed).makespan_s;
    br += rep.rasda.at(seed).best_metric;
  }
  double n = static_cast<double>(rep.seeds.size());
  rep.mean_makespan_asha = ma / n;
  rep.mean_makespan_rasda = mr / n;
  rep.mean_best_asha = ba / n;
  rep.mean_best_rasda = br / n;
  rep.speed_up = rep.mean_makespan_asha / rep.mean_makespan_rasda;
  rep.quality_ratio = mode == MetricMode::Minimize
                          ? rep.mean_best_asha / rep.mean_best_rasda
                          : rep.mean_best_rasda / rep.mean_best_asha;
  return rep;
}

namespace detail {
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}
inline std::string sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace detail

inline void write_report_md(const ComparisonReport& rep, MetricMode mode, std::ostream& os) {
  os << "# ASHA vs RASDA comparison\n\n";
  os << "Seeds: ";
  for (size_t i = 0; i < rep.seeds.size(); ++i)
    os << (i ? ", " : "") << rep.seeds[i];
  os << ". Metric mode: " << to_string(mode) << ". Diff factors are oriented so that"
     << " larger favors RASDA.\n\n";
  os << "| Metric | ASHA | RASDA | Diff. |\n";
  os << "|---|---:|---:|---:|\n";
  os << "| Best metric (mean) | " << detail::sig(rep.mean_best_asha) << " | "
     << detail::sig(rep.mean_best_rasda) << " | " << detail::fixed(rep.quality_ratio, 2)
     << "x |\n";
  os << "| Runtime (simulated seconds, mean) | " << detail::fixed(rep.mean_makespan_asha, 1)
     << " | " << detail::fixed(rep.mean_makespan_rasda, 1) << " | "
     << detail::fixed(rep.speed_up, 2) << "x |\n\n";
  os << "Per-seed runtimes (seconds):\n\n";
  os << "| Seed | ASHA | RASDA | Diff. |\n";
  os << "|---|---:|---:|---:|\n";
  for (std::uint64_t seed : rep.seeds) {
    double a = rep.asha.at(seed).makespan_s;
    double r = rep.rasda.at(seed).makespan_s;
    os << "| " << seed << " | " << detail::fixed(a, 1) << " | " << detail::fixed(r, 1)
       << " | " << detail::fixed(a / r, 2) << "x |\n";
  }
  os << "\nRuntime factors are model-dependent: simulated epoch durations come from"
     << " the configured runtime model, not from measured hardware, so they track"
     << " the model's scaling assumptions rather than any particular machine.\n";
}

}  // namespace rasda
