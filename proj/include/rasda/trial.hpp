// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rasda/ladder.hpp"
#include "rasda/search_space.hpp"

namespace rasda {

enum class TrialState { Pending, Running, WaitingForResources, Terminated, Completed };

inline const char* to_string(TrialState s) {
  switch (s) {
    case TrialState::Pending: return "pending";
    case TrialState::Running: return "running";
    case TrialState::WaitingForResources: return "waiting_for_resources";
    case TrialState::Terminated: return "terminated";
    case TrialState::Completed: return "completed";
  }
  return "?";
}

struct TrialResult {
  int trial_id = 0;
  int training_iteration = 0;  // epochs completed at report time
  double metric = 0;
  double sim_time = 0;  // seconds
  int global_batch_size = 0;
};

// The Alg.-1 resource step in isolation: on a milestone, the worker count
// for the rung that ends at that milestone; off-milestone, nothing.
inline std::optional<int> rasda_resource_decision(const TrialResult& result,
                                                  int base_resources, int sf,
                                                  std::span<const int> milestones) {
  for (size_t k = 0; k < milestones.size(); ++k)
    if (milestones[k] == result.training_iteration)
      return new_resources(base_resources, sf, static_cast<int>(k));
  return std::nullopt;
}

// One hyperparameter configuration and its lifecycle. Transitions are only
// allowed along Pending -> Running -> {WaitingForResources -> Running}* ->
// {Terminated | Completed}; anything else throws. Workers are >= 1 exactly
// while Running and 0 otherwise.
class Trial {
 public:
  Trial(int id, Configuration config) : id_(id), config_(std::move(config)) {}

  int id() const { return id_; }
  const Configuration& config() const { return config_; }
  TrialState state() const { return state_; }
  int current_rung() const { return current_rung_; }
  int allocated_workers() const { return workers_; }
  int completed_epochs() const { return completed_epochs_; }
  const std::vector<TrialResult>& history() const { return history_; }

  bool finished() const {
    return state_ == TrialState::Terminated || state_ == TrialState::Completed;
  }

  void start(int workers) {
    require(state_ == TrialState::Pending, "start");
    require(workers >= 1, "start needs workers >= 1");
    workers_ = workers;
    state_ = TrialState::Running;
  }

  void wait_for_resources() {
    require(state_ == TrialState::Running, "wait_for_resources");
    workers_ = 0;
    state_ = TrialState::WaitingForResources;
  }

  void resume(int workers) {
    require(state_ == TrialState::WaitingForResources, "resume");
    require(workers >= 1, "resume needs workers >= 1");
    workers_ = workers;
    state_ = TrialState::Running;
  }

  void terminate() {
    require(state_ == TrialState::Running || state_ == TrialState::WaitingForResources,
            "terminate");
    workers_ = 0;
    state_ = TrialState::Terminated;
  }

  void complete() {
    require(state_ == TrialState::Running, "complete");
    workers_ = 0;
    state_ = TrialState::Completed;
  }

  void record_epoch(int epoch) {
    require(state_ == TrialState::Running, "record_epoch");
    require(epoch == completed_epochs_ + 1, "epochs must advance by one");
    completed_epochs_ = epoch;
  }

  void record_result(const TrialResult& r) { history_.push_back(r); }

  // Rung index the trial is training in: 0 before the first milestone,
  // k + 1 after a promotion at milestone index k.
  void advance_rung(int rung) {
    require(rung == current_rung_ + 1, "rungs advance by one");
    current_rung_ = rung;
  }

 private:
  void require(bool ok, const std::string& what) const {
    if (!ok)
      throw std::logic_error("trial " + std::to_string(id_) + ": illegal transition '" +
                             what + "' from state " + to_string(state_));
  }

  int id_;
  Configuration config_;
  TrialState state_ = TrialState::Pending;
  int current_rung_ = 0;
  int workers_ = 0;
  int completed_epochs_ = 0;
  std::vector<TrialResult> history_;
};

}  // namespace rasda
