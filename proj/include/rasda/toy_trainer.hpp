// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasda/dynamics.hpp"
#include "rasda/prng.hpp"
#include "rasda/search_space.hpp"

namespace rasda {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TooManyWorkers : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ZeroGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergedNaN : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ToyProblemConfig {
  int n_samples = 2048;
  int n_features = 16;
  int val_samples = 512;
  double noise_std = 0.25;
  std::string kind = "linear";  // linear | quadratic ground truth

  void validate() const {
    if (n_samples < 2 || val_samples < 1) throw std::invalid_argument("toy dataset too small");
    if (n_features < 1) throw std::invalid_argument("toy features must be >= 1");
    if (noise_std < 0) throw std::invalid_argument("toy noise must be >= 0");
    if (kind != "linear" && kind != "quadratic")
      throw std::invalid_argument("toy problem kind must be linear or quadratic");
  }
};

struct ToyDataset {
  int n = 0;
  int d = 0;
  std::vector<double> inputs;   // row-major n x d
  std::vector<double> targets;  // n

  const double* row(int i) const { return inputs.data() + static_cast<size_t>(i) * d; }
};

struct ToyProblem {
  ToyProblemConfig config;
  ToyDataset train;
  ToyDataset val;
};

// Seeded regression problem. Inputs are standard normal; targets come from a
// hidden linear (or elementwise-quadratic) ground truth plus gaussian label
// noise, so gradients never collapse to zero even at the optimum.
inline ToyProblem make_toy_problem(const ToyProblemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ToyProblem p;
  p.config = cfg;
  SplitMix64 truth_rng(mix_seed(seed, fnv1a("toy-ground-truth")));
  std::vector<double> w_true(cfg.n_features);
  for (double& w : w_true) w = truth_rng.uniform(-1.0, 1.0);
  double b_true = truth_rng.uniform(-0.5, 0.5);

  auto fill = [&](ToyDataset& ds, int n, std::uint64_t stream) {
    SplitMix64 rng(mix_seed(seed, stream));
    ds.n = n;
    ds.d = cfg.n_features;
    ds.inputs.resize(static_cast<size_t>(n) * cfg.n_features);
    ds.targets.resize(n);
    for (double& x : ds.inputs) x = rng.gauss();
    for (int i = 0; i < n; ++i) {
      const double* x = ds.row(i);
      double y = b_true;
      for (int j = 0; j < cfg.n_features; ++j)
        y += cfg.kind == "linear" ? w_true[j] * x[j] : w_true[j] * x[j] * x[j];
      ds.targets[i] = y + cfg.noise_std * rng.gauss();
    }
  };
  fill(p.train, cfg.n_samples, fnv1a("toy-train"));
  fill(p.val, cfg.val_samples, fnv1a("toy-val"));
  return p;
}

// Round-robin split of n sample indices across workers: shard i holds
// i, i+N, i+2N, ... Disjoint, covering, sizes differ by at most one, and the
// union of the workers' step batches is a contiguous block of the epoch
// order, which is what makes fixed-BS_global runs worker-count invariant.
inline std::vector<std::vector<int>> shard_dataset(int n_samples, int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (workers > n_samples)
    throw TooManyWorkers("more workers than samples: " + std::to_string(workers) + " > " +
                         std::to_string(n_samples));
  std::vector<std::vector<int>> shards(workers);
  for (int i = 0; i < n_samples; ++i) shards[i % workers].push_back(i);
  return shards;
}

// (1/N) * sum of the local gradients, accumulated in worker order.
inline std::vector<double> allreduce_average(const std::vector<std::vector<double>>& local_grads) {
  if (local_grads.empty()) throw std::invalid_argument("no gradients to average");
  size_t dim = local_grads.front().size();
  std::vector<double> avg(dim, 0.0);
  for (const auto& g : local_grads) {
    if (g.size() != dim) throw DimensionMismatch("gradient dimensions differ");
    for (size_t j = 0; j < dim; ++j) avg[j] += g[j];
  }
  double inv = 1.0 / static_cast<double>(local_grads.size());
  for (double& v : avg) v *= inv;
  return avg;
}

// Linear predictor with bias; parameter layout [w_0..w_{d-1}, b].
struct LinearModel {
  int d = 0;
  std::vector<double> params;  // d + 1

  static LinearModel init(int d, std::uint64_t seed) {
    LinearModel m;
    m.d = d;
    m.params.resize(d + 1);
    SplitMix64 rng(mix_seed(seed, fnv1a("toy-init")));
    for (double& p : m.params) p = 0.01 * rng.gauss();
    return m;
  }

  double predict(const double* x) const {
    double y = params[d];
    for (int j = 0; j < d; ++j) y += params[j] * x[j];
    return y;
  }

  bool finite() const {
    for (double p : params)
      if (!std::isfinite(p)) return false;
    return true;
  }
};

// Mean squared error over an index set (or the whole dataset).
inline double mse_loss(const LinearModel& m, const ToyDataset& ds,
                       const std::vector<int>* indices = nullptr) {
  size_t n = indices ? indices->size() : static_cast<size_t>(ds.n);
  if (n == 0) throw std::invalid_argument("empty loss batch");
  double sum = 0;
  for (size_t k = 0; k < n; ++k) {
    int i = indices ? (*indices)[k] : static_cast<int>(k);
    double r = m.predict(ds.row(i)) - ds.targets[i];
    sum += r * r;
  }
  return sum / static_cast<double>(n);
}

// Gradient of one sample's squared error: 2 * residual * [x, 1].
inline std::vector<double> per_sample_gradient(const LinearModel& m, const ToyDataset& ds, int i) {
  std::vector<double> g(m.d + 1);
  double r = 2.0 * (m.predict(ds.row(i)) - ds.targets[i]);
  const double* x = ds.row(i);
  for (int j = 0; j < m.d; ++j) g[j] = r * x[j];
  g[m.d] = r;
  return g;
}

// Gradient of the mean-over-samples loss on a batch. The mean (not sum)
// convention is what makes averaging N local batch gradients equal the
// single gradient over the union batch.
inline std::vector<double> batch_gradient(const LinearModel& m, const ToyDataset& ds,
                                          const int* idx, int count) {
  if (count < 1) throw std::invalid_argument("empty gradient batch");
  std::vector<double> g(m.d + 1, 0.0);
  for (int k = 0; k < count; ++k) {
    int i = idx[k];
    double r = 2.0 * (m.predict(ds.row(i)) - ds.targets[i]);
    const double* x = ds.row(i);
    for (int j = 0; j < m.d; ++j) g[j] += r * x[j];
    g[m.d] += r;
  }
  double inv = 1.0 / count;
  for (double& v : g) v *= inv;
  return g;
}

struct GnsEstimate {
  double trace_sigma = 0;
  double grad_norm_sq = 0;
  double gns = 0;
};

// tr(Sigma) / |G|^2 from a set of per-sample gradients: G is their mean and
// trace_sigma the unbiased (m-1) estimate of the per-sample covariance
// trace. Throws ZeroGradient when |G|^2 vanishes.
inline GnsEstimate gns_from_gradients(const std::vector<std::vector<double>>& grads) {
  if (grads.size() < 2) throw std::invalid_argument("need at least two per-sample gradients");
  std::vector<double> mean = allreduce_average(grads);
  double norm_sq = 0;
  for (double v : mean) norm_sq += v * v;
  double trace = 0;
  for (const auto& g : grads) {
    for (size_t j = 0; j < g.size(); ++j) {
      double d = g[j] - mean[j];
      trace += d * d;
    }
  }
  trace /= static_cast<double>(grads.size() - 1);
  if (norm_sq < 1e-30) throw ZeroGradient("mean gradient is numerically zero");
  return {trace, norm_sq, trace / norm_sq};
}

// GNS over a seeded probe of distinct training samples.
inline GnsEstimate estimate_gns(const LinearModel& model, const ToyDataset& ds,
                                int probe_size = 256, std::uint64_t seed = 0) {
  if (probe_size < 2) throw std::invalid_argument("probe_size must be >= 2");
  if (probe_size > ds.n) throw std::invalid_argument("probe_size exceeds dataset");
  std::vector<int> idx(ds.n);
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(mix_seed(seed, fnv1a("gns-probe")));
  for (int k = 0; k < probe_size; ++k) {
    int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(ds.n - k)));
    std::swap(idx[k], idx[j]);
  }
  std::vector<std::vector<double>> grads;
  grads.reserve(probe_size);
  for (int k = 0; k < probe_size; ++k)
    grads.push_back(per_sample_gradient(model, ds, idx[k]));
  return gns_from_gradients(grads);
}

struct TrainSettings {
  double base_lr = 0.01;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double weight_decay = 0.0;
  int init_warmup = 1;
  int rescale_warmup = 1;
  int bs_local = 32;
};

// Pulls the optimizer-related parameters out of a sampled configuration.
// "lr" is required; the rest fall back to defaults when the search space
// does not include them.
inline TrainSettings settings_from_config(const Configuration& cfg, int bs_local) {
  if (!cfg.has("lr")) throw std::invalid_argument("configuration lacks 'lr'");
  TrainSettings s;
  s.base_lr = cfg.number("lr");
  if (cfg.has("optimizer")) s.optimizer = optimizer_from(cfg.str("optimizer"));
  if (cfg.has("weight_decay")) s.weight_decay = cfg.number("weight_decay");
  if (cfg.has("init_warmup")) s.init_warmup = static_cast<int>(cfg.integer("init_warmup"));
  if (cfg.has("rescale_warmup"))
    s.rescale_warmup = static_cast<int>(cfg.integer("rescale_warmup"));
  s.bs_local = bs_local;
  return s;
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
  int bs_global = 0;
};

// Data-parallel training of the toy problem, workers simulated sequentially
// inside one process so the gradient math is exact and hardware-free. Each
// step draws BS_local samples per worker from round-robin shards of a seeded
// per-epoch permutation, averages the N local gradients, and applies one
// optimizer update at the scaled learning rate. Worker-count changes go
// through a serialized checkpoint round-trip, then re-shard and warm the
// learning rate toward its new target.
class ToyTrialRunner {
 public:
  ToyTrialRunner(const ToyProblem& problem, TrainSettings settings, int workers,
                 std::uint64_t run_seed)
      : problem_(problem),
        settings_(settings),
        workers_(workers),
        run_seed_(run_seed),
        model_(LinearModel::init(problem.train.d, run_seed)),
        lr_(settings.base_lr, settings.optimizer, workers, settings.init_warmup),
        m_(model_.params.size(), 0.0),
        v_(model_.params.size(), 0.0) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (settings.bs_local < 1) throw std::invalid_argument("bs_local must be >= 1");
  }

  int workers() const { return workers_; }
  int epoch() const { return epoch_; }
  const LinearModel& model() const { return model_; }
  const std::vector<double>& params() const { return model_.params; }

  EpochRecord run_epoch() {
    int next_epoch = epoch_ + 1;
    double lr = lr_.current();
    int bs_global = settings_.bs_local * workers_;
    std::vector<int> order = epoch_order(next_epoch);
    auto shards = shard_dataset_order(order, workers_);
    int steps = static_cast<int>(order.size()) / bs_global;

    double train_loss_sum = 0;
    int train_loss_batches = 0;
    for (int s = 0; s < steps; ++s) {
      std::vector<std::vector<double>> local(workers_);
      for (int w = 0; w < workers_; ++w) {
        const int* idx = shards[w].data() + static_cast<size_t>(s) * settings_.bs_local;
        local[w] = batch_gradient(model_, problem_.train, idx, settings_.bs_local);
        train_loss_sum += mse_for(idx, settings_.bs_local);
        ++train_loss_batches;
      }
      std::vector<double> grad = allreduce_average(local);
      apply_update(grad, lr);
    }

    double val = mse_loss(model_, problem_.val);
    if (!std::isfinite(val) || !model_.finite())
      throw DivergedNaN("non-finite loss at epoch " + std::to_string(next_epoch));

    epoch_ = next_epoch;
    lr_.advance();
    EpochRecord rec;
    rec.epoch = next_epoch;
    rec.train_loss = train_loss_batches ? train_loss_sum / train_loss_batches : val;
    rec.val_loss = val;
    rec.lr = lr;
    rec.bs_global = bs_global;
    return rec;
  }

  // Relaunch with a new worker count: serialize, restore, re-scale.
  void set_workers(int new_workers) {
    if (new_workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (new_workers == workers_) return;
    std::string snapshot = checkpoint_json();
    restore_checkpoint_json(snapshot);
    lr_.rescale(new_workers, settings_.rescale_warmup);
    workers_ = new_workers;
  }

  GnsEstimate gns(int probe_size = 256) const {
    return estimate_gns(model_, problem_.train, probe_size, run_seed_);
  }

  // Flat JSON checkpoint: parameters, optimizer state, epoch counter and
  // learning-rate state. Shortest round-trip float encoding, so restoring
  // reproduces the exact bits.
  std::string checkpoint_json() const {
    nlohmann::ordered_json j;
    j["schema"] = "rasda-toy-checkpoint-v1";
    j["epoch"] = epoch_;
    j["workers"] = workers_;
    j["params"] = model_.params;
    j["opt"] = {{"step", opt_step_}, {"m", m_}, {"v", v_}};
    j["lr"] = {{"prev", lr_.prev_lr()},
               {"warmup", lr_.warmup_epochs()},
               {"since", lr_.epochs_since_rescale()}};
    return j.dump();
  }

  void restore_checkpoint_json(const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    if (j.value("schema", "") != "rasda-toy-checkpoint-v1")
      throw std::invalid_argument("unknown checkpoint schema");
    epoch_ = j["epoch"].get<int>();
    workers_ = j["workers"].get<int>();
    model_.params = j["params"].get<std::vector<double>>();
    opt_step_ = j["opt"]["step"].get<std::int64_t>();
    m_ = j["opt"]["m"].get<std::vector<double>>();
    v_ = j["opt"]["v"].get<std::vector<double>>();
    lr_ = LrSchedule(settings_.base_lr, settings_.optimizer, workers_,
                     j["lr"]["warmup"].get<int>(), j["lr"]["prev"].get<double>(),
                     j["lr"]["since"].get<int>());
  }

 private:
  std::vector<int> epoch_order(int epoch) const {
    std::vector<int> order(problem_.train.n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(mix_seed(run_seed_, mix_seed(fnv1a("epoch-order"),
                                                static_cast<std::uint64_t>(epoch))));
    for (int k = problem_.train.n - 1; k > 0; --k) {
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(k + 1)));
      std::swap(order[k], order[j]);
    }
    return order;
  }

  static std::vector<std::vector<int>> shard_dataset_order(const std::vector<int>& order,
                                                           int workers) {
    auto positions = shard_dataset(static_cast<int>(order.size()), workers);
    std::vector<std::vector<int>> shards(workers);
    for (int w = 0; w < workers; ++w) {
      shards[w].reserve(positions[w].size());
      for (int pos : positions[w]) shards[w].push_back(order[pos]);
    }
    return shards;
  }

  double mse_for(const int* idx, int count) const {
    double sum = 0;
    for (int k = 0; k < count; ++k) {
      double r = model_.predict(problem_.train.row(idx[k])) - problem_.train.targets[idx[k]];
      sum += r * r;
    }
    return sum / count;
  }

  void apply_update(const std::vector<double>& grad, double lr) {
    ++opt_step_;
    for (size_t j = 0; j < model_.params.size(); ++j) {
      double g = grad[j] + settings_.weight_decay * model_.params[j];
      if (settings_.optimizer == OptimizerKind::Sgd) {
        model_.params[j] -= lr * g;
      } else {
        m_[j] = 0.9 * m_[j] + 0.1 * g;
        v_[j] = 0.999 * v_[j] + 0.001 * g * g;
        double mhat = m_[j] / (1.0 - std::pow(0.9, static_cast<double>(opt_step_)));
        double vhat = v_[j] / (1.0 - std::pow(0.999, static_cast<double>(opt_step_)));
        model_.params[j] -= lr * mhat / (std::sqrt(vhat) + 1e-8);
      }
    }
  }

  const ToyProblem& problem_;
  TrainSettings settings_;
  int workers_;
  std::uint64_t run_seed_;
  LinearModel model_;
  LrSchedule lr_;
  std::vector<double> m_, v_;  // Adam moments (unused for SGD)
  std::int64_t opt_step_ = 0;
  int epoch_ = 0;
};

// Convenience wrapper: fixed worker count for `epochs` epochs.
inline std::vector<EpochRecord> train(const ToyProblem& problem, const TrainSettings& settings,
                                      int workers, int epochs, std::uint64_t seed) {
  ToyTrialRunner runner(problem, settings, workers, seed);
  std::vector<EpochRecord> records;
  records.reserve(epochs);
  for (int e = 0; e < epochs; ++e) records.push_back(runner.run_epoch());
  return records;
}

}  // namespace rasda
