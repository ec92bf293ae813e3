// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsgd/common.hpp"
#include "lsgd/dataset.hpp"
#include "lsgd/rng.hpp"

namespace lsgd {

// Fully-connected ReLU network with a softmax cross-entropy head.
//
// Parameter layout (fixed, part of the contract): layer by layer, the weight
// matrix W_k of shape [layer_sizes[k+1] x layer_sizes[k]] in row-major order
// (rows = output units), followed by the bias vector b_k.
struct MlpModel {
  std::vector<int> layer_sizes;  // input dim, hidden dims..., class count

  enum class Activation { relu };
  Activation activation = Activation::relu;

  int depth() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int n_classes() const { return layer_sizes.back(); }

  int64_t n_params() const;
  int64_t weight_offset(int layer) const;
  int64_t bias_offset(int layer) const;

  void validate() const;
};

// Weights uniform in [-scale, +scale], drawn in layout order; biases zero
// (no draws consumed for biases).
ParamVector init_params(const MlpModel& model, Rng rng, double scale);

struct BatchGrad {
  ParamVector grad;  // mean of per-sample gradients
  double mean_loss = 0.0;
};

// Mean softmax cross-entropy over the batch. Per-sample losses are summed in
// batch index order, then divided by the batch size.
double batch_loss(const MlpModel& model, const ParamVector& w, const BatchView& batch);
double batch_loss_serial(const MlpModel& model, const ParamVector& w, const BatchView& batch);

// Mean gradient via backpropagation, per-sample contributions summed in batch
// index order. `batch_gradient` runs per-sample passes in parallel (OpenMP)
// but folds them in the same fixed order as the serial reference, so both
// return bitwise-identical results for any thread count.
BatchGrad batch_gradient(const MlpModel& model, const ParamVector& w, const BatchView& batch);
BatchGrad batch_gradient_serial(const MlpModel& model, const ParamVector& w, const BatchView& batch);

// Central differences (loss(w+h*e_k) - loss(w-h*e_k)) / (2h) per coordinate.
ParamVector finite_diff_gradient(const MlpModel& model, const ParamVector& w,
                                 const BatchView& batch, double h = 1e-6);

}  // namespace lsgd
