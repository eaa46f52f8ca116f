// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rasda/config.hpp"
#include "rasda/harness.hpp"
#include "rasda/replay.hpp"
#include "rasda/report.hpp"

using namespace rasda;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(
policy = both
backend = sim
metric_mode = min
trials = 4
total_workers = 8
base_resources = 2
min_t = 2
max_t = 8
sf = 2
rf = 2
seeds = 1
bs_local = 16
rt.dataset_samples = 1000
rt.per_sample_time = 0.01
rt.fixed_overhead = 2
rt.comm_coeff = 1
param.lr = logfloat 1e-4 1
param.optimizer = categorical sgd,adam
)";

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rasda_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("kv config parses") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig, "tiny");
  CHECK(cfg.policies.size() == 2);
  CHECK(cfg.backend == "sim");
  CHECK(cfg.trials == 4);
  CHECK(cfg.total_workers == 8);
  CHECK(cfg.ladder().milestones == std::vector<int>{2, 4, 8});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
  CHECK(cfg.space.size() == 2);
  // defaults
  CHECK(cfg.checkpoint.checkpoint_every == 5);
  CHECK(cfg.checkpoint.relaunch_cost == 30.0);
}

TEST_CASE("json config is an accepted alternate encoding") {
  const char* json = R"({
    "policy": "rasda",
    "backend": "sim",
    "metric_mode": "min",
    "trials": 2,
    "total_workers": 4,
    "base_resources": 2,
    "min_t": 2, "max_t": 4, "sf": 2, "rf": 2,
    "seeds": [5, 6],
    "bs_local": 8,
    "param.lr": "logfloat 1e-4 1"
  })";
  ExperimentConfig cfg = parse_experiment_config(json, "tiny.json");
  CHECK(cfg.policies == std::vector<Policy>{Policy::Rasda});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6});
  CHECK(cfg.space.front().name == "lr");
}

TEST_CASE("config rejects malformed input") {
  auto with_line = [](const std::string& extra) {
    return std::string(kTinyConfig) + extra + "\n";
  };
  CHECK_THROWS_AS(parse_experiment_config(with_line("unknown_key = 1"), "t"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(with_line("trials = 5"), "t"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(with_line("param.bad = gaussian 0 1"), "t"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("policy = both\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("nonsense line\n", "t"), ConfigError);

  std::string swapped(kTinyConfig);
  swapped.replace(swapped.find("min_t = 2"), 9, "min_t = 9");
  CHECK_THROWS_AS(parse_experiment_config(swapped, "t"), ConfigError);

  std::string toy(kTinyConfig);
  toy.replace(toy.find("backend = sim"), 13, "backend = toy");
  std::string no_lr = toy;
  no_lr.replace(no_lr.find("param.lr = logfloat 1e-4 1"), 26, "param.xx = float 0 1   ");
  CHECK_THROWS_AS(parse_experiment_config(no_lr, "t"), ConfigError);
}

TEST_CASE("shipped presets encode the reference experiment shapes") {
  struct Expect {
    const char* file;
    int trials, workers, base;
    std::vector<int> milestones;
  };
  for (const Expect& e : {Expect{"cv64.cfg", 32, 64, 2, {5, 10, 20, 40}},
                          Expect{"am128.cfg", 16, 128, 8, {5, 10, 20}},
                          Expect{"cfd128.cfg", 16, 128, 8, {5, 10, 20, 40}}}) {
    ExperimentConfig cfg =
        load_experiment_config(std::string(RASDA_PRESET_DIR) + "/" + e.file);
    INFO(e.file);
    CHECK(cfg.trials == e.trials);
    CHECK(cfg.total_workers == e.workers);
    CHECK(cfg.base_resources == e.base);
    CHECK(cfg.ladder().milestones == e.milestones);
    CHECK(cfg.seeds.size() == 3);
    CHECK(cfg.policies.size() == 2);
  }
}

TEST_CASE("run_experiment writes logs, summary and report") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig, "tiny");
  fs::path dir = fresh_dir("run");
  HarnessOutput out = run_experiment(cfg, dir);

  CHECK(fs::exists(dir / "events_asha_1.jsonl"));
  CHECK(fs::exists(dir / "events_rasda_1.jsonl"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "report.md"));
  CHECK(out.cells.size() == 2);

  std::string report = slurp(dir / "report.md");
  CHECK(report.find("| Runtime (simulated seconds, mean) |") != std::string::npos);
  CHECK(report.find("model-dependent") != std::string::npos);

  // Every generated log passes replay.
  for (const char* name : {"events_asha_1.jsonl", "events_rasda_1.jsonl"}) {
    std::ifstream in(dir / name, std::ios::binary);
    CHECK_FALSE(validate_event_log(in).has_value());
  }

  // Byte-identical reruns.
  fs::path dir2 = fresh_dir("run2");
  run_experiment(cfg, dir2);
  CHECK(slurp(dir / "summary.csv") == slurp(dir2 / "summary.csv"));
  CHECK(slurp(dir / "events_rasda_1.jsonl") == slurp(dir2 / "events_rasda_1.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("summary csv round-trips") {
  std::vector<SimSummary> rows{
      {"asha", 1, 4, 8, 1234.5, 0.125, 9876.0},
      {"rasda", 1, 4, 8, 812.25, 0.118, 6543.0},
  };
  std::ostringstream os;
  write_summary_csv(rows, os);
  std::istringstream is(os.str());
  auto back = read_summary_csv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0].policy == "asha");
  CHECK(back[0].makespan_s == 1234.5);
  CHECK(back[1].best_metric == 0.118);

  ComparisonReport rep = build_comparison(back, MetricMode::Minimize);
  CHECK(rep.speed_up == Catch::Approx(1234.5 / 812.25));
  CHECK(rep.quality_ratio == Catch::Approx(0.125 / 0.118));

  std::vector<SimSummary> incomplete{{"asha", 1, 4, 8, 10.0, 0.2, 1.0}};
  CHECK_THROWS(build_comparison(incomplete, MetricMode::Minimize));
}

TEST_CASE("replay flags a mutated resource grant") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig, "tiny");
  fs::path dir = fresh_dir("mutate");
  run_experiment(cfg, dir);
  std::string log = slurp(dir / "events_rasda_1.jsonl");

  size_t pos = log.find("\"kind\":\"ResourcesChanged\"");
  REQUIRE(pos != std::string::npos);
  size_t to_pos = log.find("\"to\":", pos);
  REQUIRE(to_pos != std::string::npos);
  // Bump the granted worker count by prefixing a digit.
  log.insert(to_pos + 5, "9");

  std::istringstream is(log);
  auto violation = validate_event_log(is);
  REQUIRE(violation.has_value());
  CHECK(violation->name == "resource-arithmetic");
  fs::remove_all(dir);
}

TEST_CASE("replay flags mutated metrics and passes empty logs") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig, "tiny");
  fs::path dir = fresh_dir("mutate2");
  run_experiment(cfg, dir);

  // An empty log is vacuously valid.
  std::istringstream empty("");
  CHECK_FALSE(validate_event_log(empty).has_value());

  // Give a terminated trial an unbeatable metric; re-deriving its rung
  // comparison then promotes it, contradicting the recorded stop verdict.
  std::ifstream in(dir / "events_asha_1.jsonl", std::ios::binary);
  SimEventLog log = SimEventLog::read_jsonl(in);
  const auto& events = log.events();
  size_t target = 0;
  for (size_t i = 0; i + 1 < events.size(); ++i) {
    if (events[i].kind == EventKind::ResultReported &&
        events[i + 1].kind == EventKind::Decision &&
        events[i + 1].data.value("verdict", "") == "stop" &&
        events[i + 1].data.value("completed", true) == false &&
        !events[i + 1].data.contains("reason")) {
      target = i;
      break;
    }
  }
  REQUIRE(target != 0);
  SimEventLog mutated;
  for (size_t i = 0; i < events.size(); ++i) {
    SimEvent copy = events[i];
    if (i == target) copy.data["metric"] = -1e15;
    mutated.append(copy.t, copy.kind, copy.trial, copy.data);
  }
  auto violation = validate_events(mutated);
  REQUIRE(violation.has_value());
  CHECK(violation->name == "decision-mismatch");

  // Malformed JSON is reported as such.
  std::istringstream junk("not json\n");
  auto bad = validate_event_log(junk);
  REQUIRE(bad.has_value());
  CHECK(bad->name == "malformed-line");
  fs::remove_all(dir);
}

TEST_CASE("partial outputs are removed when a run fails") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig, "tiny");
  fs::path dir = fresh_dir("fail");
  // Occupy the second cell's output path with a directory so its ofstream
  // fails after the first cell has been written.
  fs::create_directories(dir / "events_rasda_1.jsonl");
  CHECK_THROWS(run_experiment(cfg, dir));
  CHECK_FALSE(fs::exists(dir / "events_asha_1.jsonl"));
  CHECK_FALSE(fs::exists(dir / "summary.csv"));
  fs::remove_all(dir);
}
