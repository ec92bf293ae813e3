// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "lsgd/common.hpp"

namespace lsgd {

enum class UpdateMode { plain, momentum };

// Defaults mirror the usual large-minibatch recipe: momentum 0.9, weight
// decay 1e-4, base lr 0.1 per global batch of 256, 5 warmup epochs, x0.1
// decay every 30 epochs.
struct HyperParams {
  double base_lr = 0.1;  // per base global batch of 256
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double warmup_epochs = 5.0;
  int decay_every_epochs = 30;
  double decay_factor = 0.1;
  UpdateMode mode = UpdateMode::momentum;

  void validate() const {
    check<ConfigError>(base_lr > 0.0, "optim.base_lr must be > 0");
    check<ConfigError>(momentum >= 0.0 && momentum < 1.0, "optim.momentum must be in [0, 1)");
    check<ConfigError>(weight_decay >= 0.0, "optim.weight_decay must be >= 0");
    check<ConfigError>(warmup_epochs >= 0.0, "optim.warmup_epochs must be >= 0");
    check<ConfigError>(decay_every_epochs >= 1, "optim.decay_every_epochs must be >= 1");
    check<ConfigError>(decay_factor > 0.0 && decay_factor <= 1.0, "optim.decay_factor must be in (0, 1]");
  }
};

struct OptimizerState {
  ParamVector velocity;  // same length as w; used in momentum mode
  int64_t iteration = 0;
};

// Linear-scaling schedule with gradual warmup and step decay.
//
//   target_lr = base_lr * (n_workers * local_batch) / 256
//   warmup  (epoch < warmup_epochs):  base_lr + (target_lr - base_lr) * epoch / warmup_epochs
//   after:                            target_lr * decay_factor^floor(epoch / decay_every_epochs)
//
// Warmup takes precedence if the two windows ever overlap.
double learning_rate(const HyperParams& hp, int n_workers, int local_batch, double epoch_float);

// plain:    w -= lr * delta
// momentum: g = delta + weight_decay * w;  v = momentum * v + g;  w -= lr * v
void sgd_update(ParamVector& w, std::span<const double> delta, OptimizerState& state,
                const HyperParams& hp, double lr);

}  // namespace lsgd
