// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rasda {

// Parametric per-epoch runtime of data-parallel training on N workers:
//   epoch_time(N) = dataset_samples * per_sample_time / N
//                 + fixed_overhead + comm_coeff * log2(N).
// The compute term splits perfectly across workers; the log term models
// tree all-reduce gradient synchronization latency.
struct RuntimeModel {
  std::int64_t dataset_samples = 100000;
  double per_sample_time = 1e-3;  // seconds
  double fixed_overhead = 5.0;    // seconds per epoch
  double comm_coeff = 2.0;        // seconds per epoch per log2(N)

  void validate() const {
    if (dataset_samples < 1) throw std::invalid_argument("dataset_samples must be >= 1");
    if (per_sample_time < 0 || fixed_overhead < 0 || comm_coeff < 0)
      throw std::invalid_argument("runtime coefficients must be >= 0");
    if (epoch_time(1) <= 0) throw std::invalid_argument("epoch_time(1) must be positive");
  }

  double epoch_time(int workers) const {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    double n = static_cast<double>(workers);
    return static_cast<double>(dataset_samples) * per_sample_time / n +
           fixed_overhead + comm_coeff * std::log2(n);
  }
};

inline double epoch_time(const RuntimeModel& model, int workers) {
  return model.epoch_time(workers);
}

// Checkpoint cost is paid between epochs, every `checkpoint_every` epochs.
// Relaunch cost is paid only when a trial restarts with a changed worker
// count, on top of the checkpoint written at that milestone.
struct CheckpointModel {
  int checkpoint_every = 5;
  double checkpoint_cost = 5.0;   // seconds
  double relaunch_cost = 30.0;    // seconds

  void validate() const {
    if (checkpoint_every < 1) throw std::invalid_argument("checkpoint_every must be >= 1");
    if (checkpoint_cost < 0 || relaunch_cost < 0)
      throw std::invalid_argument("checkpoint costs must be >= 0");
  }

  double cost_after_epoch(int epoch) const {
    return epoch % checkpoint_every == 0 ? checkpoint_cost : 0.0;
  }
};

}  // namespace rasda
