// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rasda/ladder.hpp"
#include "rasda/trial.hpp"

namespace rasda {

enum class Policy { Asha, Rasda };
enum class MetricMode { Minimize, Maximize };

inline const char* to_string(Policy p) { return p == Policy::Asha ? "asha" : "rasda"; }
inline const char* to_string(MetricMode m) { return m == MetricMode::Minimize ? "min" : "max"; }

struct UnknownTrial : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateReport : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SchedulerConfig {
  Policy policy = Policy::Asha;
  RungLadder ladder;
  int base_resources = 1;
  MetricMode metric_mode = MetricMode::Minimize;

  void validate() const {
    if (base_resources < 1) throw std::invalid_argument("base_resources must be >= 1");
    if (ladder.milestones.empty()) throw std::invalid_argument("ladder has no milestones");
  }
};

// Verdict for one reported result. Stop carries whether the trial finished
// its full budget (completed) or lost a rung comparison (terminated).
// ContinueWithResources is only emitted by the RASDA policy at milestones
// and carries the uncapped worker count for the rung being entered.
struct SchedulerDecision {
  enum class Kind { Continue, Stop, ContinueWithResources };
  Kind kind = Kind::Continue;
  bool completed = false;  // meaningful for Stop
  int workers = 0;         // meaningful for ContinueWithResources

  static SchedulerDecision cont() { return {Kind::Continue, false, 0}; }
  static SchedulerDecision stop(bool done) { return {Kind::Stop, done, 0}; }
  static SchedulerDecision with_resources(int w) {
    return {Kind::ContinueWithResources, false, w};
  }

  bool operator==(const SchedulerDecision&) const = default;
};

inline const char* to_string(SchedulerDecision::Kind k) {
  switch (k) {
    case SchedulerDecision::Kind::Continue: return "continue";
    case SchedulerDecision::Kind::Stop: return "stop";
    case SchedulerDecision::Kind::ContinueWithResources: return "continue_with_resources";
  }
  return "?";
}

struct RungEntry {
  int trial_id = 0;
  double metric = 0;
  std::uint64_t report_order = 0;
};

struct RungRecord {
  int rung_index = 0;
  std::vector<RungEntry> entries;  // in report order
};

// Rolling successive-halving decision logic, shared by ASHA and RASDA.
//
// On a milestone report the entry is recorded into its rung and the reporter
// is kept iff it ranks within the top ceil(n/rf) of the n entries recorded
// at that rung so far, ties broken by earlier report order, then lower trial
// id. Decisions are immediate and final: losers are terminated, not paused.
// Reaching max_t always completes the trial. RASDA differs from ASHA only in
// attaching the next rung's worker count (base * sf^(r+1)) to promotions, so
// training between milestones m_r and m_{r+1} runs at base * sf^(r+1).
//
// The state is a pure deterministic function of the report sequence.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig config) : config_(std::move(config)) {
    config_.validate();
    rungs_.resize(config_.ladder.milestones.size());
    for (size_t k = 0; k < rungs_.size(); ++k)
      rungs_[k].rung_index = static_cast<int>(k);
  }

  const SchedulerConfig& config() const { return config_; }

  void register_trial(int trial_id) {
    if (!status_.emplace(trial_id, Status{}).second)
      throw std::invalid_argument("trial registered twice: " + std::to_string(trial_id));
  }

  bool is_registered(int trial_id) const { return status_.count(trial_id) != 0; }
  bool is_alive(int trial_id) const { return status_view(trial_id).alive; }

  // Marks a trial dead outside the promotion rule (backend divergence).
  void force_stop(int trial_id) { status_ref(trial_id).alive = false; }

  const RungRecord& rung(int index) const { return rungs_.at(index); }

  SchedulerDecision on_result(const TrialResult& result) {
    Status& st = status_ref(result.trial_id);
    if (!st.alive)
      throw std::logic_error("result for finished trial " + std::to_string(result.trial_id));
    if (result.training_iteration < 1 ||
        result.training_iteration > config_.ladder.max_t)
      throw std::logic_error("training_iteration outside [1, max_t]");

    auto milestone = config_.ladder.milestone_index(result.training_iteration);
    bool at_budget = result.training_iteration == config_.ladder.max_t;
    if (!milestone && !at_budget) return SchedulerDecision::cont();

    if (milestone) record_entry(*milestone, result, st);

    if (at_budget) {
      st.alive = false;
      return SchedulerDecision::stop(true);
    }

    int r = *milestone;
    if (!promoted(rungs_[r], result.trial_id)) {
      st.alive = false;
      return SchedulerDecision::stop(false);
    }
    st.rung = r + 1;
    if (config_.policy == Policy::Rasda)
      return SchedulerDecision::with_resources(
          new_resources(config_.base_resources, config_.ladder.sf, r + 1));
    return SchedulerDecision::cont();
  }

 private:
  struct Status {
    bool alive = true;
    int rung = 0;
    std::vector<bool> reported;  // per milestone index
  };

  const Status& status_view(int trial_id) const {
    auto it = status_.find(trial_id);
    if (it == status_.end())
      throw UnknownTrial("unknown trial " + std::to_string(trial_id));
    return it->second;
  }

  Status& status_ref(int trial_id) {
    return const_cast<Status&>(status_view(trial_id));
  }

  void record_entry(int r, const TrialResult& result, Status& st) {
    if (st.reported.size() < rungs_.size()) st.reported.resize(rungs_.size(), false);
    if (st.reported[r])
      throw DuplicateReport("trial " + std::to_string(result.trial_id) +
                            " already reported at milestone " +
                            std::to_string(config_.ladder.milestones[r]));
    st.reported[r] = true;
    rungs_[r].entries.push_back(
        {result.trial_id, result.metric,
         static_cast<std::uint64_t>(rungs_[r].entries.size())});
  }

  // Strict total order: better metric first, then earlier report, then
  // lower trial id.
  bool better(const RungEntry& a, const RungEntry& b) const {
    if (a.metric != b.metric)
      return config_.metric_mode == MetricMode::Minimize ? a.metric < b.metric
                                                         : a.metric > b.metric;
    if (a.report_order != b.report_order) return a.report_order < b.report_order;
    return a.trial_id < b.trial_id;
  }

  bool promoted(const RungRecord& rung, int trial_id) const {
    const RungEntry* mine = nullptr;
    for (const auto& e : rung.entries)
      if (e.trial_id == trial_id) mine = &e;
    int rank = 1;
    for (const auto& e : rung.entries)
      if (e.trial_id != trial_id && better(e, *mine)) ++rank;
    int n = static_cast<int>(rung.entries.size());
    int keep = (n + config_.ladder.rf - 1) / config_.ladder.rf;  // ceil(n/rf)
    return rank <= keep;
  }

  SchedulerConfig config_;
  std::vector<RungRecord> rungs_;
  std::map<int, Status> status_;
};

// Classical synchronous successive halving, used as a reference oracle.
// metrics[i][r] is trial i's metric at rung r; every trial has a value for
// every rung (unused ones are ignored once the trial is cut). Returns the
// surviving trial ids entering each rung: result[0] is everyone, result[r+1]
// the best ceil(|result[r]|/rf) of result[r] by rung-r metric (ties by lower
// trial id).
inline std::vector<std::vector<int>> simulate_synchronous_sh(
    const std::vector<std::vector<double>>& metrics, int rf, MetricMode mode) {
  if (metrics.empty()) throw ShapeMismatch("no trials");
  if (rf < 2) throw std::invalid_argument("rf must be >= 2");
  size_t rungs = metrics.front().size();
  for (const auto& row : metrics)
    if (row.size() != rungs) throw ShapeMismatch("ragged metric matrix");

  std::vector<std::vector<int>> survivors;
  std::vector<int> alive(metrics.size());
  for (size_t i = 0; i < metrics.size(); ++i) alive[i] = static_cast<int>(i);
  survivors.push_back(alive);

  for (size_t r = 0; r < rungs; ++r) {
    std::vector<int> order = alive;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double ma = metrics[a][r], mb = metrics[b][r];
      if (ma != mb) return mode == MetricMode::Minimize ? ma < mb : ma > mb;
      return a < b;
    });
    size_t keep = (order.size() + rf - 1) / rf;
    order.resize(keep);
    std::sort(order.begin(), order.end());
    alive = order;
    survivors.push_back(alive);
  }
  return survivors;
}

}  // namespace rasda
