// SPDX-License-Identifier: Apache-2.0
#include "lsgd/optimizer.hpp"

#include <cmath>

namespace lsgd {

double learning_rate(const HyperParams& hp, int n_workers, int local_batch, double epoch_float) {
  check(n_workers >= 1, "learning_rate: n_workers must be >= 1");
  check(local_batch >= 1, "learning_rate: local_batch must be >= 1");
  check(epoch_float >= 0.0, "learning_rate: epoch_float must be >= 0");

  double global_batch = static_cast<double>(n_workers) * static_cast<double>(local_batch);
  double target = hp.base_lr * global_batch / 256.0;
  if (hp.warmup_epochs > 0.0 && epoch_float < hp.warmup_epochs) {
    return hp.base_lr + (target - hp.base_lr) * (epoch_float / hp.warmup_epochs);
  }
  int64_t steps = static_cast<int64_t>(std::floor(epoch_float / static_cast<double>(hp.decay_every_epochs)));
  double lr = target;
  for (int64_t i = 0; i < steps; ++i) lr *= hp.decay_factor;
  return lr;
}

void sgd_update(ParamVector& w, std::span<const double> delta, OptimizerState& state,
                const HyperParams& hp, double lr) {
  check(delta.size() == w.size(), "sgd_update: delta length ", delta.size(),
        " does not match parameter length ", w.size());
  check(lr > 0.0, "sgd_update: lr must be > 0");

  size_t n = w.size();
  if (hp.mode == UpdateMode::plain) {
    for (size_t k = 0; k < n; ++k) w[k] -= lr * delta[k];
  } else {
    if (state.velocity.size() != n) state.velocity.assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
      double g = delta[k] + hp.weight_decay * w[k];
      state.velocity[k] = hp.momentum * state.velocity[k] + g;
      w[k] -= lr * state.velocity[k];
    }
  }
  ++state.iteration;
}

}  // namespace lsgd
