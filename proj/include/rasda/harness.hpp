// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "rasda/backends.hpp"
#include "rasda/config.hpp"
#include "rasda/report.hpp"

namespace rasda {

struct RunCell {
  Policy policy;
  std::uint64_t seed = 0;
  SimSummary summary;
  std::filesystem::path events_path;
};

struct HarnessOutput {
  std::vector<RunCell> cells;
  std::filesystem::path summary_csv;
  std::filesystem::path report_md;
};

inline std::unique_ptr<TrialBackend> make_backend(const ExperimentConfig& cfg,
                                                  std::uint64_t seed) {
  std::uint64_t backend_seed = mix_seed(seed, fnv1a("backend"));
  if (cfg.backend == "toy")
    return std::make_unique<ToyBackend>(cfg.toy, cfg.bs_local, backend_seed);
  return std::make_unique<CurveBackend>(cfg.dynamics, cfg.bs_local, cfg.base_resources,
                                        backend_seed);
}

// Runs every (policy, seed) cell of an experiment and writes
// events_<policy>_<seed>.jsonl, summary.csv and report.md into out_dir.
// Everything written so far is removed if any cell fails.
inline HarnessOutput run_experiment(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto cleanup = [&written]() {
    for (const fs::path& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  };

  try {
    HarnessOutput out;
    std::vector<SimSummary> rows;
    for (Policy policy : cfg.policies) {
      for (std::uint64_t seed : cfg.seeds) {
        auto configs = cfg.sample_trial_configs(seed);
        auto backend = make_backend(cfg, seed);
        Simulation sim(cfg.sim_params(policy, seed), std::move(configs), *backend);
        sim.run();

        fs::path events = out_dir / ("events_" + std::string(to_string(policy)) + "_" +
                                     std::to_string(seed) + ".jsonl");
        {
          std::ofstream os(events, std::ios::binary);
          if (!os) throw std::runtime_error("cannot write " + events.string());
          sim.log().write_jsonl(os);
        }
        written.push_back(events);
        rows.push_back(sim.summary());
        out.cells.push_back({policy, seed, rows.back(), events});
      }
    }

    out.summary_csv = out_dir / "summary.csv";
    {
      std::ofstream os(out.summary_csv, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + out.summary_csv.string());
      write_summary_csv(rows, os);
    }
    written.push_back(out.summary_csv);

    out.report_md = out_dir / "report.md";
    {
      std::ofstream os(out.report_md, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + out.report_md.string());
      if (cfg.policies.size() == 2) {
        write_report_md(build_comparison(rows, cfg.metric_mode), cfg.metric_mode, os);
      } else {
        os << "# HPO run summary\n\nSingle-policy run ("
           << to_string(cfg.policies.front()) << "); see summary.csv for per-seed rows.\n";
      }
    }
    written.push_back(out.report_md);
    return out;
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace rasda
