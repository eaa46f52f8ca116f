// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>

#include "rasda/cluster_sim.hpp"
#include "rasda/dynamics.hpp"
#include "rasda/toy_trainer.hpp"

namespace rasda {

// Synthetic-curve backend: each trial's metric follows its configuration's
// learning curve, advanced per epoch by the statistical efficiency of the
// current global batch size.
class CurveBackend : public TrialBackend {
 public:
  CurveBackend(DynamicsModel model, int bs_local, int base_resources, std::uint64_t seed)
      : model_(model), bs_local_(bs_local), seed_(seed) {
    bs_ref_ = model.bs_ref > 0 ? model.bs_ref
                               : static_cast<double>(bs_local) * base_resources;
  }

  void start_trial(const Trial& trial) override {
    states_[trial.id()] = State{curve_for_config(trial.config(), seed_, model_), 0.0};
  }

  EpochOutcome run_epoch(int trial_id, int epoch, int workers) override {
    State& st = states_.at(trial_id);
    double bs_global = static_cast<double>(bs_local_) * workers;
    CurveStep step = advance_curve(st.curve, st.e_effective, bs_global,
                                   model_.noise_model(), bs_ref_, epoch);
    st.e_effective = step.e_effective;
    return {step.loss, false};
  }

  void change_workers(int, int, int) override {}  // batch size is read per epoch

  double effective_epochs(int trial_id) const { return states_.at(trial_id).e_effective; }

 private:
  struct State {
    CurveParams curve;
    double e_effective = 0;
  };

  DynamicsModel model_;
  int bs_local_;
  double bs_ref_ = 0;
  std::uint64_t seed_;
  std::map<int, State> states_;
};

// Real-execution backend: every epoch is actual data-parallel training of
// the shared toy problem. Divergence is reported, not thrown, so the
// simulator can terminate the trial with a worst-case metric.
class ToyBackend : public TrialBackend {
 public:
  ToyBackend(const ToyProblemConfig& problem_config, int bs_local, std::uint64_t seed)
      : problem_(make_toy_problem(problem_config, seed)), bs_local_(bs_local), seed_(seed) {}

  void start_trial(const Trial& trial) override {
    runners_.emplace(trial.id(),
                     ToyTrialRunner(problem_, settings_from_config(trial.config(), bs_local_),
                                    trial.allocated_workers(),
                                    mix_seed(seed_, static_cast<std::uint64_t>(trial.id()))));
  }

  EpochOutcome run_epoch(int trial_id, int, int) override {
    try {
      return {runners_.at(trial_id).run_epoch().val_loss, false};
    } catch (const DivergedNaN&) {
      return {0.0, true};
    }
  }

  void change_workers(int trial_id, int, int new_workers) override {
    runners_.at(trial_id).set_workers(new_workers);
  }

  const ToyProblem& problem() const { return problem_; }
  const ToyTrialRunner& runner(int trial_id) const { return runners_.at(trial_id); }

 private:
  ToyProblem problem_;
  int bs_local_;
  std::uint64_t seed_;
  std::map<int, ToyTrialRunner> runners_;
};

}  // namespace rasda
