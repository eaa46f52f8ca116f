// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rasda/prng.hpp"
#include "rasda/search_space.hpp"

namespace rasda {

enum class OptimizerKind { Sgd, Adam };

inline OptimizerKind optimizer_from(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

// Synthetic learning curve: noiseless loss at effective epoch e' is
// f_final + (f_init - f_final) * exp(-rate * e'). Observation noise is a
// seeded gaussian per epoch so trajectories are reproducible.
struct CurveParams {
  double f_init = 1.0;
  double f_final = 0.0;
  double rate = 0.1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;  // noise stream identity

  double noiseless(double e_effective) const {
    return f_final + (f_init - f_final) * std::exp(-rate * e_effective);
  }
};

// Proxy for the gradient noise scale: B_noise(e) = b0 * (1 + growth * e),
// nondecreasing in effective epochs. A rising noise scale is what makes late
// large batches statistically cheap.
struct NoiseScaleModel {
  double b0 = 256.0;
  double growth = 0.5;

  double noise_scale(double e_effective) const {
    return b0 * (1.0 + growth * e_effective);
  }
};

// Training progress per sample at batch size BS_global relative to the
// reference batch: (B_noise + BS_ref) / (B_noise + BS_global). Equals 1 at
// the reference batch, decays as the batch grows, recovers as B_noise grows.
inline double statistical_efficiency(double bs_global, double b_noise, double bs_ref) {
  if (!(bs_global > 0) || !(b_noise > 0) || !(bs_ref > 0))
    throw std::logic_error("statistical_efficiency needs positive arguments");
  if (bs_global < bs_ref)
    throw std::logic_error("statistical_efficiency needs BS_global >= BS_ref");
  return (b_noise + bs_ref) / (b_noise + bs_global);
}

struct CurveStep {
  double e_effective = 0;
  double loss = 0;
};

// Advances a curve by one wall epoch at the given global batch size: the
// effective epoch grows by the statistical efficiency of that batch, and the
// observed loss is the curve value plus the seeded noise draw for `epoch`.
inline CurveStep advance_curve(const CurveParams& curve, double e_effective,
                               double bs_global, const NoiseScaleModel& noise,
                               double bs_ref, int epoch) {
  if (e_effective < 0) throw std::logic_error("e_effective must be >= 0");
  double eff = statistical_efficiency(bs_global, noise.noise_scale(e_effective), bs_ref);
  double e_next = e_effective + eff;
  double observed = curve.noiseless(e_next);
  if (curve.noise_sigma > 0) {
    SplitMix64 rng(mix_seed(curve.seed, static_cast<std::uint64_t>(epoch)));
    observed += curve.noise_sigma * rng.gauss();
  }
  return {e_next, observed};
}

// Learning-rate scaling for data-parallel training: linear in workers for
// SGD, square root for Adam. After a rescale the rate walks linearly from
// the previous value to the new target over `warmup_epochs` epochs:
// epochs_since_rescale counts completed epochs since the change, so epoch 0
// takes the first interpolation step and epoch `warmup_epochs` sits exactly
// on the target.
inline double scaled_lr(double base_lr, int workers, OptimizerKind optimizer,
                        int warmup_epochs, int epochs_since_rescale,
                        double prev_lr) {
  if (!(base_lr > 0)) throw std::invalid_argument("base_lr must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (warmup_epochs < 0 || epochs_since_rescale < 0)
    throw std::invalid_argument("warm-up arguments must be >= 0");
  double target = optimizer == OptimizerKind::Sgd
                      ? base_lr * workers
                      : base_lr * std::sqrt(static_cast<double>(workers));
  if (epochs_since_rescale >= warmup_epochs) return target;
  double frac = static_cast<double>(epochs_since_rescale + 1) /
                static_cast<double>(warmup_epochs + 1);
  return prev_lr + (target - prev_lr) * frac;
}

// Stateful wrapper used by the trainer: remembers the previous target across
// rescales and counts epochs so each epoch's rate is one scaled_lr call.
class LrSchedule {
 public:
  LrSchedule(double base_lr, OptimizerKind optimizer, int workers, int initial_warmup)
      : base_lr_(base_lr), optimizer_(optimizer), workers_(workers),
        warmup_(initial_warmup), prev_lr_(base_lr) {}

  // Restores a snapshot (checkpoint round-trips).
  LrSchedule(double base_lr, OptimizerKind optimizer, int workers, int warmup,
             double prev_lr, int epochs_since_rescale)
      : base_lr_(base_lr), optimizer_(optimizer), workers_(workers),
        warmup_(warmup), prev_lr_(prev_lr),
        epochs_since_rescale_(epochs_since_rescale) {}

  // Rate applied during the next epoch; call advance() once the epoch ran.
  double current() const {
    return scaled_lr(base_lr_, workers_, optimizer_, warmup_, epochs_since_rescale_, prev_lr_);
  }

  void advance() { ++epochs_since_rescale_; }

  void rescale(int new_workers, int rescale_warmup) {
    prev_lr_ = current();  // warm up from the rate actually in effect
    workers_ = new_workers;
    warmup_ = rescale_warmup;
    epochs_since_rescale_ = 0;
  }

  int workers() const { return workers_; }
  int warmup_epochs() const { return warmup_; }
  int epochs_since_rescale() const { return epochs_since_rescale_; }
  double prev_lr() const { return prev_lr_; }

 private:
  double base_lr_;
  OptimizerKind optimizer_;
  int workers_;
  int warmup_;
  double prev_lr_;
  int epochs_since_rescale_ = 0;
};

// Knobs for deriving curves from configurations, exposed via the experiment
// config. bs_ref = 0 means "local batch size * base resources".
struct DynamicsModel {
  double b0 = 256.0;
  double growth = 0.5;
  double bs_ref = 0.0;
  double noise = 0.01;      // observation noise, relative to the curve spread
  double bowl_width = 0.35; // quadratic penalty per squared decade off the lr optimum
  double base_rate = 0.12;  // progress constant of a well-tuned curve

  NoiseScaleModel noise_model() const { return {b0, growth}; }
};

// Deterministic configuration -> curve mapping. Quality is a quadratic bowl
// in log10(lr) around a seeded optimum; categorical and integer choices add
// seeded multiplicative offsets; everything else is per-config jitter. The
// same (config, seed) always yields the same curve, and better-placed
// configurations converge lower and faster, so halving decisions are
// meaningful.
inline CurveParams curve_for_config(const Configuration& cfg, std::uint64_t experiment_seed,
                                    const DynamicsModel& model) {
  std::uint64_t ch = config_hash(cfg);
  SplitMix64 jitter(mix_seed(experiment_seed, ch));

  double penalty = 0.0;
  if (cfg.has("lr")) {
    SplitMix64 opt_rng(mix_seed(experiment_seed, fnv1a("lr-optimum")));
    double log_lr_opt = opt_rng.uniform(-4.0, -1.0);
    double d = std::log10(cfg.number("lr")) - log_lr_opt;
    penalty += std::min(2.0, model.bowl_width * d * d);
  }
  double cat_mult = 1.0;
  for (const auto& [name, value] : cfg.values) {
    if (name == "lr") continue;
    if (std::holds_alternative<double>(value)) continue;  // other floats: neutral
    SplitMix64 vr(mix_seed(experiment_seed,
                           fnv1a("choice:" + name + "=" + param_value_text(value))));
    cat_mult *= 0.9 + 0.25 * vr.uniform();
  }

  CurveParams curve;
  curve.f_final = 0.02 * (1.0 + 0.5 * jitter.uniform()) * (1.0 + penalty) * cat_mult;
  double spread = 1.2 + 0.6 * jitter.uniform();
  curve.f_init = curve.f_final + spread;
  curve.rate = (model.base_rate + 0.08 * jitter.uniform()) / (1.0 + 0.5 * penalty);
  curve.noise_sigma = model.noise * spread;
  curve.seed = mix_seed(experiment_seed, mix_seed(ch, fnv1a("curve-noise")));
  return curve;
}

}  // namespace rasda
