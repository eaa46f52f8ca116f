// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rasda/event_log.hpp"
#include "rasda/runtime_model.hpp"
#include "rasda/scheduler.hpp"
#include "rasda/search_space.hpp"
#include "rasda/trial.hpp"

namespace rasda {

struct InfeasibleAllocation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Worst representable metric, reported for diverged trials.
inline double worst_metric(MetricMode mode) {
  return mode == MetricMode::Minimize ? 1e30 : -1e30;
}

inline bool metric_better(double a, double b, MetricMode mode) {
  return mode == MetricMode::Minimize ? a < b : a > b;
}

struct EpochOutcome {
  double metric = 0;
  bool diverged = false;
};

// Metric source driving one run. The simulator owns time and scheduling;
// the backend only answers "what did epoch e of trial t produce".
class TrialBackend {
 public:
  virtual ~TrialBackend() = default;
  virtual void start_trial(const Trial& trial) = 0;
  virtual EpochOutcome run_epoch(int trial_id, int epoch, int workers) = 0;
  virtual void change_workers(int trial_id, int old_workers, int new_workers) = 0;
};

struct GrantRequest {
  int trial_id = 0;
  int workers = 0;
  int rung = 0;                       // rung the trial is entering
  std::optional<double> metric;       // promotion metric; absent for initial starts
  int prev_workers = 0;               // 0 for initial starts
  std::uint64_t seq = 0;              // FIFO tiebreak
};

enum class GrantOutcome { Granted, Queued };

// Fixed-size worker pool with a priority queue of pending grants. Fills
// happen strictly in priority order (deeper rung first, then better metric
// at that rung, then FIFO); if the best pending request does not fit,
// nothing below it is granted.
class Cluster {
 public:
  Cluster(int total_workers, MetricMode mode)
      : total_(total_workers), free_(total_workers), mode_(mode) {
    if (total_workers < 1) throw std::invalid_argument("total_workers must be >= 1");
  }

  int total() const { return total_; }
  int free() const { return free_; }
  size_t pending() const { return pending_.size(); }

  void release(int workers) {
    free_ += workers;
    if (free_ > total_) throw std::logic_error("released more workers than allocated");
  }

  void enqueue(GrantRequest req) {
    if (req.workers < 1 || req.workers > total_)
      throw std::logic_error("grant request outside [1, total_workers]");
    pending_.push_back(std::move(req));
  }

  // Allocates and returns the highest-priority pending request if it fits.
  std::optional<GrantRequest> next_fill() {
    if (pending_.empty()) return std::nullopt;
    auto best = pending_.begin();
    for (auto it = std::next(pending_.begin()); it != pending_.end(); ++it)
      if (before(*it, *best)) best = it;
    if (best->workers > free_) return std::nullopt;
    GrantRequest req = *best;
    pending_.erase(best);
    free_ -= req.workers;
    return req;
  }

 private:
  bool before(const GrantRequest& a, const GrantRequest& b) const {
    if (a.rung != b.rung) return a.rung > b.rung;
    if (a.metric && b.metric && *a.metric != *b.metric)
      return metric_better(*a.metric, *b.metric, mode_);
    if (a.metric.has_value() != b.metric.has_value()) return a.metric.has_value();
    return a.seq < b.seq;
  }

  int total_;
  int free_;
  MetricMode mode_;
  std::vector<GrantRequest> pending_;
};

// Queue-or-grant entry point matching the scheduler-facing contract. Side
// effect: drains every grant that priority order allows right now.
inline GrantOutcome grant_resources(Cluster& cluster, const GrantRequest& request) {
  cluster.enqueue(request);
  GrantOutcome outcome = GrantOutcome::Queued;
  while (auto filled = cluster.next_fill())
    if (filled->trial_id == request.trial_id && filled->seq == request.seq)
      outcome = GrantOutcome::Granted;
  return outcome;
}

struct SimParams {
  Policy policy = Policy::Asha;
  MetricMode metric_mode = MetricMode::Minimize;
  int num_trials = 1;
  int total_workers = 1;
  int base_resources = 1;
  RungLadder ladder;
  RuntimeModel runtime;
  CheckpointModel checkpoint;
  int bs_local = 32;
  std::uint64_t seed = 0;
  std::string backend_name = "sim";
  // Spread of per-trial epoch cost: each trial's epoch time is scaled by a
  // configuration-derived factor in [1 - hetero, 1 + hetero], reflecting
  // that sampled architectural choices change the model's cost. Staggers
  // milestone arrivals; 0 gives identical lockstep trials.
  double runtime_hetero = 0.0;

  void validate() const {
    if (num_trials < 1) throw std::invalid_argument("need at least one trial");
    if (runtime_hetero < 0 || runtime_hetero >= 1)
      throw std::invalid_argument("runtime_hetero must be in [0, 1)");
    if (base_resources < 1) throw std::invalid_argument("base_resources must be >= 1");
    if (total_workers < base_resources)
      throw InfeasibleAllocation("base_resources exceeds total_workers");
    if (bs_local < 1) throw std::invalid_argument("bs_local must be >= 1");
    if (ladder.milestones.empty()) throw std::invalid_argument("empty ladder");
    runtime.validate();
    checkpoint.validate();
  }
};

struct SimSummary {
  std::string policy;
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = 0;
  double makespan_s = 0;
  double best_metric = 0;
  double total_worker_seconds = 0;
};

// Deterministic discrete-event simulation of one HPO run on a fixed-size
// cluster. Single-threaded loop over a (time, sequence) priority queue; no
// wall-clock dependence. Worker conservation (sum of allocations plus free
// equals total) is asserted after every event.
class Simulation {
 public:
  Simulation(SimParams params, std::vector<Configuration> configs, TrialBackend& backend)
      : params_(std::move(params)),
        backend_(backend),
        scheduler_({params_.policy, params_.ladder, params_.base_resources,
                    params_.metric_mode}),
        cluster_(params_.total_workers, params_.metric_mode) {
    params_.validate();
    if (static_cast<int>(configs.size()) != params_.num_trials)
      throw std::invalid_argument("one configuration per trial required");
    trials_.reserve(configs.size());
    for (size_t i = 0; i < configs.size(); ++i)
      trials_.emplace_back(static_cast<int>(i), std::move(configs[i]));
    alloc_since_.assign(trials_.size(), 0.0);
    cost_factor_.reserve(trials_.size());
    for (const Trial& tr : trials_) {
      SplitMix64 rng(mix_seed(config_hash(tr.config()), fnv1a("runtime-cost")));
      cost_factor_.push_back(1.0 + params_.runtime_hetero * (2.0 * rng.uniform() - 1.0));
    }
  }

  void run() {
    Json header;
    header["policy"] = to_string(params_.policy);
    header["seed"] = params_.seed;
    header["backend"] = params_.backend_name;
    header["metric_mode"] = to_string(params_.metric_mode);
    header["num_trials"] = params_.num_trials;
    header["total_workers"] = params_.total_workers;
    header["base_resources"] = params_.base_resources;
    header["min_t"] = params_.ladder.min_t;
    header["max_t"] = params_.ladder.max_t;
    header["sf"] = params_.ladder.sf;
    header["rf"] = params_.ladder.rf;
    header["milestones"] = params_.ladder.milestones;
    header["bs_local"] = params_.bs_local;
    header["runtime_hetero"] = params_.runtime_hetero;
    log_.append(0.0, EventKind::RunStarted, std::nullopt, std::move(header));

    for (Trial& tr : trials_) {
      scheduler_.register_trial(tr.id());
      request_workers(0.0, tr.id(), params_.base_resources, 0, std::nullopt, 0);
    }
    drain(0.0);
    check_conservation();

    while (!queue_.empty()) {
      PendingEpoch ev = queue_.top();
      queue_.pop();
      process_epoch(ev.t, ev.trial_id);
      check_conservation();
    }

    for (const Trial& tr : trials_)
      if (!tr.finished())
        throw std::logic_error("simulation ended with unfinished trial " +
                               std::to_string(tr.id()));
    if (cluster_.free() != cluster_.total())
      throw std::logic_error("workers not fully released at end of run");
  }

  const SimEventLog& log() const { return log_; }
  const std::vector<Trial>& trials() const { return trials_; }
  int capped_grants() const { return capped_grants_; }
  const SimParams& params() const { return params_; }

  SimSummary summary() const {
    SimSummary s;
    s.policy = to_string(params_.policy);
    s.seed = params_.seed;
    s.trials = params_.num_trials;
    s.workers = params_.total_workers;
    s.makespan_s = log_.makespan();
    s.best_metric = best_metric_.value_or(worst_metric(params_.metric_mode));
    s.total_worker_seconds = worker_seconds_;
    return s;
  }

 private:
  struct PendingEpoch {
    double t = 0;
    std::uint64_t seq = 0;
    int trial_id = 0;
    bool operator>(const PendingEpoch& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };

  void process_epoch(double t, int trial_id) {
    Trial& tr = trials_[trial_id];
    int epoch = tr.completed_epochs() + 1;
    tr.record_epoch(epoch);
    EpochOutcome out = backend_.run_epoch(trial_id, epoch, tr.allocated_workers());
    double metric = out.diverged ? worst_metric(params_.metric_mode) : out.metric;
    int bs_global = params_.bs_local * tr.allocated_workers();

    log_.append(t, EventKind::EpochCompleted, trial_id, Json{{"epoch", epoch}});
    TrialResult result{trial_id, epoch, metric, t, bs_global};
    tr.record_result(result);
    log_.append(t, EventKind::ResultReported, trial_id,
                Json{{"training_iteration", epoch},
                     {"metric", metric},
                     {"global_batch_size", bs_global}});
    if (!best_metric_ || metric_better(metric, *best_metric_, params_.metric_mode))
      best_metric_ = metric;

    if (out.diverged) {
      log_.append(t, EventKind::Decision, trial_id,
                  Json{{"verdict", "stop"}, {"completed", false}, {"reason", "diverged"}});
      scheduler_.force_stop(trial_id);
      finish_trial(t, tr, false);
      return;
    }

    SchedulerDecision d = scheduler_.on_result(result);
    Json ddata{{"verdict", to_string(d.kind)}};
    if (d.kind == SchedulerDecision::Kind::Stop) ddata["completed"] = d.completed;
    if (d.kind == SchedulerDecision::Kind::ContinueWithResources)
      ddata["workers"] = d.workers;
    log_.append(t, EventKind::Decision, trial_id, std::move(ddata));

    auto milestone = params_.ladder.milestone_index(epoch);
    switch (d.kind) {
      case SchedulerDecision::Kind::Continue:
        if (milestone && epoch < params_.ladder.max_t)
          tr.advance_rung(*milestone + 1);  // ASHA promotion, workers unchanged
        schedule_next_epoch(t, tr, params_.checkpoint.cost_after_epoch(epoch));
        break;
      case SchedulerDecision::Kind::Stop:
        finish_trial(t, tr, d.completed);
        break;
      case SchedulerDecision::Kind::ContinueWithResources: {
        // Alg.-1 requests are unbounded; the pool is not.
        int want = std::min(d.workers, params_.total_workers);
        if (want < d.workers) ++capped_grants_;
        tr.advance_rung(*milestone + 1);
        if (want == tr.allocated_workers()) {
          // Already at the requested size (capped); no relaunch needed.
          schedule_next_epoch(t, tr, params_.checkpoint.cost_after_epoch(epoch));
          break;
        }
        int old_workers = tr.allocated_workers();
        worker_seconds_ += (t - alloc_since_[trial_id]) * old_workers;
        tr.wait_for_resources();
        cluster_.release(old_workers);
        request_workers(t, trial_id, want, tr.current_rung(), metric, old_workers);
        drain(t);
        break;
      }
    }
  }

  void request_workers(double t, int trial_id, int workers, int rung,
                       std::optional<double> metric, int prev_workers) {
    GrantRequest req{trial_id, workers, rung, metric, prev_workers, next_seq_++};
    Json data{{"workers", workers}, {"rung", rung}};
    if (prev_workers > 0) data["prev_workers"] = prev_workers;
    log_.append(t, EventKind::GrantQueued, trial_id, std::move(data));
    cluster_.enqueue(std::move(req));
  }

  void drain(double t) {
    while (auto req = cluster_.next_fill()) fill(t, *req);
  }

  void fill(double t, const GrantRequest& req) {
    Trial& tr = trials_[req.trial_id];
    log_.append(t, EventKind::GrantFilled, req.trial_id,
                Json{{"workers", req.workers},
                     {"free_after", cluster_.free()},
                     {"total", cluster_.total()}});
    alloc_since_[req.trial_id] = t;
    if (tr.state() == TrialState::Pending) {
      tr.start(req.workers);
      backend_.start_trial(tr);
      log_.append(t, EventKind::TrialStarted, req.trial_id, Json{{"workers", req.workers}});
      schedule_next_epoch(t, tr, 0.0);
    } else {
      tr.resume(req.workers);
      backend_.change_workers(req.trial_id, req.prev_workers, req.workers);
      log_.append(t, EventKind::ResourcesChanged, req.trial_id,
                  Json{{"from", req.prev_workers}, {"to", req.workers}});
      double delay = params_.checkpoint.cost_after_epoch(tr.completed_epochs()) +
                     params_.checkpoint.relaunch_cost;
      schedule_next_epoch(t, tr, delay);
    }
  }

  void finish_trial(double t, Trial& tr, bool completed) {
    int workers = tr.allocated_workers();
    worker_seconds_ += (t - alloc_since_[tr.id()]) * workers;
    if (completed)
      tr.complete();
    else
      tr.terminate();
    cluster_.release(workers);
    log_.append(t, completed ? EventKind::TrialCompleted : EventKind::TrialTerminated,
                tr.id(),
                Json{{"released", workers},
                     {"free_after", cluster_.free()},
                     {"total", cluster_.total()}});
    drain(t);
  }

  void schedule_next_epoch(double t, const Trial& tr, double extra_delay) {
    double epoch = cost_factor_[tr.id()] * params_.runtime.epoch_time(tr.allocated_workers());
    queue_.push({t + extra_delay + epoch, next_seq_++, tr.id()});
  }

  void check_conservation() const {
    int allocated = 0;
    for (const Trial& tr : trials_) allocated += tr.allocated_workers();
    if (allocated + cluster_.free() != cluster_.total())
      throw std::logic_error("worker conservation violated: allocated=" +
                             std::to_string(allocated) + " free=" +
                             std::to_string(cluster_.free()) + " total=" +
                             std::to_string(cluster_.total()));
  }

  SimParams params_;
  TrialBackend& backend_;
  Scheduler scheduler_;
  Cluster cluster_;
  std::vector<Trial> trials_;
  std::vector<double> alloc_since_;
  std::vector<double> cost_factor_;
  std::priority_queue<PendingEpoch, std::vector<PendingEpoch>, std::greater<>> queue_;
  SimEventLog log_;
  std::uint64_t next_seq_ = 0;
  double worker_seconds_ = 0;
  std::optional<double> best_metric_;
  int capped_grants_ = 0;
};

inline std::pair<SimEventLog, SimSummary> run_simulation(
    const SimParams& params, const std::vector<Configuration>& configs,
    TrialBackend& backend) {
  Simulation sim(params, configs, backend);
  sim.run();
  return {sim.log(), sim.summary()};
}

}  // namespace rasda
