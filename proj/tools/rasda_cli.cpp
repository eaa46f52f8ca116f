// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: `ladder` prints rung milestones, `run` executes an
// experiment config and writes event logs plus reports, `replay` re-validates
// an event log, `gns-demo` trains the toy problem and prints the gradient
// noise scale per epoch, `compare` joins two summary.csv files.
//
// Exit codes: 0 success, 1 backend failure, 2 bad arguments or config,
// 3 replay violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rasda/config.hpp"
#include "rasda/harness.hpp"
#include "rasda/replay.hpp"
#include "rasda/report.hpp"
#include "rasda/toy_trainer.hpp"

namespace {

struct LadderArgs {
  int min_t = 1;
  int max_t = 1;
  int sf = 2;
};

struct RunArgs {
  std::string config_path;
  std::string seeds;
  std::string out_dir;
};

struct GnsArgs {
  std::uint64_t seed = 1;
  int epochs = 30;
  int workers = 1;
  double lr = 0.05;
  std::string optimizer = "sgd";
  int bs_local = 32;
  int probe = 256;
  int samples = 2048;
  int features = 16;
  double noise = 0.25;
};

int cmd_ladder(const LadderArgs& args) {
  try {
    rasda::RungLadder ladder = rasda::compute_ladder(args.min_t, args.max_t, args.sf, 2);
    for (int m : ladder.milestones) std::cout << m << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "ladder: " << e.what() << '\n';
    return 2;
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : rasda::split(text, ','))
    seeds.push_back(static_cast<std::uint64_t>(rasda::parse_int(s)));
  return seeds;
}

int cmd_run(const RunArgs& args) {
  rasda::ExperimentConfig cfg;
  try {
    cfg = rasda::load_experiment_config(args.config_path);
    std::string seeds = args.seeds;
    if (seeds.empty())
      if (const char* env = std::getenv("RASDA_SEED")) seeds = env;
    if (!seeds.empty()) cfg.seeds = parse_seed_list(seeds);
    if (cfg.seeds.empty()) throw rasda::ConfigError("no seeds to run");
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return 2;
  }

  std::string out_dir = args.out_dir;
  if (out_dir.empty())
    if (const char* env = std::getenv("RASDA_OUT")) out_dir = env;
  if (out_dir.empty()) out_dir = "rasda_out";

  try {
    rasda::HarnessOutput out = rasda::run_experiment(cfg, out_dir);
    for (const rasda::RunCell& cell : out.cells)
      std::cout << to_string(cell.policy) << " seed " << cell.seed << ": makespan "
                << rasda::format_double(cell.summary.makespan_s) << " s, best metric "
                << rasda::format_double(cell.summary.best_metric) << " -> "
                << cell.events_path.string() << '\n';
    std::cout << "summary: " << out.summary_csv.string() << '\n';
    std::cout << "report:  " << out.report_md.string() << '\n';
    return 0;
  } catch (const rasda::ConfigError& e) {
    std::cerr << "run: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run: " << e.what() << '\n';
    return 1;
  }
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "replay: cannot read '" << path << "'\n";
    return 2;
  }
  auto violation = rasda::validate_event_log(in);
  if (!violation) {
    std::cout << "ok\n";
    return 0;
  }
  std::cerr << "violation: " << violation->name;
  if (violation->event_index) std::cerr << " (event " << violation->event_index << ")";
  std::cerr << ": " << violation->detail << '\n';
  return 3;
}

int cmd_gns_demo(const GnsArgs& args) {
  try {
    rasda::ToyProblemConfig pc;
    pc.n_samples = args.samples;
    pc.n_features = args.features;
    pc.noise_std = args.noise;
    rasda::ToyProblem problem = rasda::make_toy_problem(pc, args.seed);

    rasda::TrainSettings settings;
    settings.base_lr = args.lr;
    settings.optimizer = rasda::optimizer_from(args.optimizer);
    settings.bs_local = args.bs_local;
    rasda::ToyTrialRunner runner(problem, settings, args.workers, args.seed);

    std::cout << "epoch,val_loss,gns\n";
    for (int e = 0; e < args.epochs; ++e) {
      rasda::EpochRecord rec = runner.run_epoch();
      rasda::GnsEstimate gns = runner.gns(args.probe);
      std::cout << rec.epoch << ',' << rasda::format_double(rec.val_loss) << ','
                << rasda::format_double(gns.gns) << '\n';
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gns-demo: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gns-demo: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const std::string& a, const std::string& b) {
  std::vector<rasda::SimSummary> rows;
  for (const std::string& path : {a, b}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "compare: cannot read '" << path << "'\n";
      return 2;
    }
    try {
      for (auto& r : rasda::read_summary_csv(in)) rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      std::cerr << "compare: " << path << ": " << e.what() << '\n';
      return 2;
    }
  }
  rasda::write_summary_csv(rows, std::cout);
  try {
    // Orientation of the quality factor is unknown from CSV alone; use
    // minimize, which matches the shipped presets.
    rasda::ComparisonReport rep = rasda::build_comparison(rows, rasda::MetricMode::Minimize);
    std::cout << '\n';
    rasda::write_report_md(rep, rasda::MetricMode::Minimize, std::cout);
  } catch (const std::exception& e) {
    std::cout << "\n(no asha/rasda comparison: " << e.what() << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASHA / RASDA hyperparameter optimization: cluster simulator and toy trainer"};
  app.require_subcommand(1);

  LadderArgs ladder_args;
  auto* ladder = app.add_subcommand("ladder", "Print the rung milestone epochs");
  ladder->add_option("--min", ladder_args.min_t, "Minimum training epochs")->required();
  ladder->add_option("--max", ladder_args.max_t, "Maximum training epochs")->required();
  ladder->add_option("--sf", ladder_args.sf, "Scaling factor between milestones")
      ->default_val(2);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("--config", run_args.config_path, "Experiment config file")->required();
  run->add_option("--seed", run_args.seeds,
                  "Comma-separated seed override (also: RASDA_SEED)");
  run->add_option("--out", run_args.out_dir, "Output directory (also: RASDA_OUT)");

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "Re-validate an event log");
  replay->add_option("log", replay_path, "events_*.jsonl file")->required();

  GnsArgs gns_args;
  auto* gns = app.add_subcommand("gns-demo",
                                 "Train the toy problem and print per-epoch GNS");
  gns->add_option("--seed", gns_args.seed, "Seed")->default_val(1);
  gns->add_option("--epochs", gns_args.epochs, "Epochs to train")->default_val(30);
  gns->add_option("--workers", gns_args.workers, "Data-parallel workers")->default_val(1);
  gns->add_option("--lr", gns_args.lr, "Base learning rate")->default_val(0.05);
  gns->add_option("--optimizer", gns_args.optimizer, "sgd or adam")->default_val("sgd");
  gns->add_option("--bs-local", gns_args.bs_local, "Per-worker batch size")->default_val(32);
  gns->add_option("--probe", gns_args.probe, "GNS probe size")->default_val(256);
  gns->add_option("--samples", gns_args.samples, "Training samples")->default_val(2048);
  gns->add_option("--features", gns_args.features, "Input features")->default_val(16);
  gns->add_option("--noise", gns_args.noise, "Label noise std")->default_val(0.25);

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "Join two summary.csv files");
  cmp->add_option("a", cmp_a, "First summary.csv")->required();
  cmp->add_option("b", cmp_b, "Second summary.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (ladder->parsed()) return cmd_ladder(ladder_args);
  if (run->parsed()) return cmd_run(run_args);
  if (replay->parsed()) return cmd_replay(replay_path);
  if (gns->parsed()) return cmd_gns_demo(gns_args);
  if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b);
  return 2;
}
