// SPDX-License-Identifier: Apache-2.0
#include "lsgd/mlp.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lsgd {

namespace {

// Per-sample passes for one block are computed in parallel, then folded into
// the accumulator strictly in batch index order. The block size is a compile
// time constant so the floating point operation sequence does not depend on
// the thread count.
constexpr int64_t kBlock = 32;

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_num() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

// Scratch for one sample's forward/backward pass.
struct Workspace {
  // act[k] holds the level-k+1 activation (post-ReLU for hidden layers,
  // logits then probabilities for the top layer).
  std::vector<std::vector<double>> act;
  std::vector<double> delta;
  std::vector<double> delta_next;

  explicit Workspace(const MlpModel& model) {
    int depth = model.depth();
    act.resize(static_cast<size_t>(depth));
    int widest = 0;
    for (int k = 0; k < depth; ++k) {
      act[static_cast<size_t>(k)].resize(static_cast<size_t>(model.layer_sizes[static_cast<size_t>(k) + 1]));
      widest = std::max(widest, model.layer_sizes[static_cast<size_t>(k) + 1]);
    }
    delta.resize(static_cast<size_t>(widest));
    delta_next.resize(static_cast<size_t>(widest));
  }
};

// Forward pass for one sample; fills ws.act and returns the cross-entropy
// loss. On return ws.act.back() holds softmax probabilities.
double forward_sample(const MlpModel& model, const ParamVector& w, const double* x,
                      int32_t label, Workspace& ws) {
  int depth = model.depth();
  const double* in = x;
  for (int k = 0; k < depth; ++k) {
    int n_in = model.layer_sizes[static_cast<size_t>(k)];
    int n_out = model.layer_sizes[static_cast<size_t>(k) + 1];
    const double* wk = w.data() + model.weight_offset(k);
    const double* bk = w.data() + model.bias_offset(k);
    double* out = ws.act[static_cast<size_t>(k)].data();
    for (int j = 0; j < n_out; ++j) {
      double z = bk[j];
      const double* row = wk + static_cast<int64_t>(j) * n_in;
      for (int i = 0; i < n_in; ++i) z += row[i] * in[i];
      out[j] = (k + 1 < depth && z < 0.0) ? 0.0 : z;  // ReLU on hidden layers
    }
    in = out;
  }

  // Softmax cross-entropy via log-sum-exp.
  std::vector<double>& logits = ws.act.back();
  int n_cls = model.n_classes();
  double zmax = logits[0];
  for (int c = 1; c < n_cls; ++c) zmax = std::max(zmax, logits[static_cast<size_t>(c)]);
  double sum = 0.0;
  for (int c = 0; c < n_cls; ++c) sum += std::exp(logits[static_cast<size_t>(c)] - zmax);
  double lse = zmax + std::log(sum);
  double loss = lse - logits[static_cast<size_t>(label)];
  for (int c = 0; c < n_cls; ++c) {
    logits[static_cast<size_t>(c)] = std::exp(logits[static_cast<size_t>(c)] - lse);
  }
  return loss;
}

// Backward pass for one sample. Expects ws.act as left by forward_sample and
// writes the per-sample gradient (not accumulated) into g.
void backward_sample(const MlpModel& model, const ParamVector& w, const double* x,
                     int32_t label, Workspace& ws, double* g) {
  int depth = model.depth();
  int n_cls = model.n_classes();
  const std::vector<double>& probs = ws.act.back();
  for (int c = 0; c < n_cls; ++c) ws.delta[static_cast<size_t>(c)] = probs[static_cast<size_t>(c)];
  ws.delta[static_cast<size_t>(label)] -= 1.0;

  for (int k = depth - 1; k >= 0; --k) {
    int n_in = model.layer_sizes[static_cast<size_t>(k)];
    int n_out = model.layer_sizes[static_cast<size_t>(k) + 1];
    const double* a_prev = (k == 0) ? x : ws.act[static_cast<size_t>(k) - 1].data();
    double* gw = g + model.weight_offset(k);
    double* gb = g + model.bias_offset(k);
    for (int j = 0; j < n_out; ++j) {
      double d = ws.delta[static_cast<size_t>(j)];
      double* row = gw + static_cast<int64_t>(j) * n_in;
      for (int i = 0; i < n_in; ++i) row[i] = d * a_prev[i];
      gb[j] = d;
    }
    if (k > 0) {
      const double* wk = w.data() + model.weight_offset(k);
      const double* a_k = ws.act[static_cast<size_t>(k) - 1].data();
      for (int i = 0; i < n_in; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_out; ++j) s += wk[static_cast<int64_t>(j) * n_in + i] * ws.delta[static_cast<size_t>(j)];
        ws.delta_next[static_cast<size_t>(i)] = (a_k[i] > 0.0) ? s : 0.0;
      }
      std::swap(ws.delta, ws.delta_next);
    }
  }
}

void validate_batch(const MlpModel& model, const ParamVector& w, const BatchView& batch) {
  model.validate();
  check(static_cast<int64_t>(w.size()) == model.n_params(), "batch dimension check: parameter vector length ",
        w.size(), " does not match model (", model.n_params(), ")");
  check(batch.data != nullptr && batch.size() > 0, "batch dimension check: empty batch");
  check(batch.data->n_features == model.input_dim(), "batch dimension check: dataset has ",
        batch.data->n_features, " features but model expects ", model.input_dim());
  for (int64_t i = 0; i < batch.size(); ++i) {
    int32_t y = batch.label(i);
    check(y >= 0 && y < model.n_classes(), "batch dimension check: label ", y,
          " out of range [0, ", model.n_classes(), ")");
  }
}

}  // namespace

int64_t MlpModel::n_params() const {
  int64_t n = 0;
  for (int k = 0; k + 1 < static_cast<int>(layer_sizes.size()); ++k) {
    n += static_cast<int64_t>(layer_sizes[static_cast<size_t>(k)]) * layer_sizes[static_cast<size_t>(k) + 1] +
         layer_sizes[static_cast<size_t>(k) + 1];
  }
  return n;
}

int64_t MlpModel::weight_offset(int layer) const {
  int64_t off = 0;
  for (int k = 0; k < layer; ++k) {
    off += static_cast<int64_t>(layer_sizes[static_cast<size_t>(k)]) * layer_sizes[static_cast<size_t>(k) + 1] +
           layer_sizes[static_cast<size_t>(k) + 1];
  }
  return off;
}

int64_t MlpModel::bias_offset(int layer) const {
  return weight_offset(layer) +
         static_cast<int64_t>(layer_sizes[static_cast<size_t>(layer)]) * layer_sizes[static_cast<size_t>(layer) + 1];
}

void MlpModel::validate() const {
  check<ConfigError>(layer_sizes.size() >= 2, "model.layer_sizes must list at least input and output dims");
  for (int s : layer_sizes) check<ConfigError>(s >= 1, "model.layer_sizes entries must be positive");
  check<ConfigError>(layer_sizes.back() >= 2, "model.layer_sizes: class count must be >= 2");
}

ParamVector init_params(const MlpModel& model, Rng rng, double scale) {
  model.validate();
  check(scale >= 0.0, "init_params: scale must be >= 0");
  ParamVector w(static_cast<size_t>(model.n_params()), 0.0);
  for (int k = 0; k < model.depth(); ++k) {
    int64_t n_w = static_cast<int64_t>(model.layer_sizes[static_cast<size_t>(k)]) *
                  model.layer_sizes[static_cast<size_t>(k) + 1];
    double* wk = w.data() + model.weight_offset(k);
    for (int64_t i = 0; i < n_w; ++i) wk[i] = rng.next_symmetric(scale);
    // biases stay zero
  }
  return w;
}

double batch_loss_serial(const MlpModel& model, const ParamVector& w, const BatchView& batch) {
  validate_batch(model, w, batch);
  Workspace ws(model);
  double acc = 0.0;
  for (int64_t i = 0; i < batch.size(); ++i) {
    acc += forward_sample(model, w, batch.sample(i), batch.label(i), ws);
  }
  return acc / static_cast<double>(batch.size());
}

double batch_loss(const MlpModel& model, const ParamVector& w, const BatchView& batch) {
  validate_batch(model, w, batch);
  int64_t n = batch.size();
  std::vector<Workspace> ws(static_cast<size_t>(max_threads()), Workspace(model));
  std::vector<double> sample_loss(static_cast<size_t>(std::min(kBlock, n)));
  double acc = 0.0;
  for (int64_t b0 = 0; b0 < n; b0 += kBlock) {
    int64_t bn = std::min(kBlock, n - b0);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < bn; ++i) {
      Workspace& tws = ws[static_cast<size_t>(thread_num())];
      sample_loss[static_cast<size_t>(i)] =
          forward_sample(model, w, batch.sample(b0 + i), batch.label(b0 + i), tws);
    }
    for (int64_t i = 0; i < bn; ++i) acc += sample_loss[static_cast<size_t>(i)];
  }
  return acc / static_cast<double>(n);
}

BatchGrad batch_gradient_serial(const MlpModel& model, const ParamVector& w, const BatchView& batch) {
  validate_batch(model, w, batch);
  int64_t n_params = model.n_params();
  Workspace ws(model);
  ParamVector sample_grad(static_cast<size_t>(n_params));
  BatchGrad out;
  out.grad.assign(static_cast<size_t>(n_params), 0.0);
  double loss_acc = 0.0;
  for (int64_t i = 0; i < batch.size(); ++i) {
    const double* x = batch.sample(i);
    int32_t y = batch.label(i);
    loss_acc += forward_sample(model, w, x, y, ws);
    backward_sample(model, w, x, y, ws, sample_grad.data());
    for (int64_t k = 0; k < n_params; ++k) out.grad[static_cast<size_t>(k)] += sample_grad[static_cast<size_t>(k)];
  }
  double inv = static_cast<double>(batch.size());
  for (int64_t k = 0; k < n_params; ++k) out.grad[static_cast<size_t>(k)] /= inv;
  out.mean_loss = loss_acc / inv;
  return out;
}

BatchGrad batch_gradient(const MlpModel& model, const ParamVector& w, const BatchView& batch) {
  validate_batch(model, w, batch);
  int64_t n_params = model.n_params();
  int64_t n = batch.size();
  std::vector<Workspace> ws(static_cast<size_t>(max_threads()), Workspace(model));
  int64_t slots = std::min(kBlock, n);
  std::vector<ParamVector> sample_grad(static_cast<size_t>(slots),
                                       ParamVector(static_cast<size_t>(n_params)));
  std::vector<double> sample_loss(static_cast<size_t>(slots));

  BatchGrad out;
  out.grad.assign(static_cast<size_t>(n_params), 0.0);
  double loss_acc = 0.0;
  for (int64_t b0 = 0; b0 < n; b0 += kBlock) {
    int64_t bn = std::min(kBlock, n - b0);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < bn; ++i) {
      Workspace& tws = ws[static_cast<size_t>(thread_num())];
      const double* x = batch.sample(b0 + i);
      int32_t y = batch.label(b0 + i);
      sample_loss[static_cast<size_t>(i)] = forward_sample(model, w, x, y, tws);
      backward_sample(model, w, x, y, tws, sample_grad[static_cast<size_t>(i)].data());
    }
    // Fold in batch index order; this matches the serial reference exactly.
    for (int64_t i = 0; i < bn; ++i) {
      loss_acc += sample_loss[static_cast<size_t>(i)];
      const double* g = sample_grad[static_cast<size_t>(i)].data();
      double* acc = out.grad.data();
      for (int64_t k = 0; k < n_params; ++k) acc[k] += g[k];
    }
  }
  double inv = static_cast<double>(n);
  for (int64_t k = 0; k < n_params; ++k) out.grad[static_cast<size_t>(k)] /= inv;
  out.mean_loss = loss_acc / inv;
  return out;
}

ParamVector finite_diff_gradient(const MlpModel& model, const ParamVector& w,
                                 const BatchView& batch, double h) {
  validate_batch(model, w, batch);
  check(h > 0.0, "finite_diff_gradient: h must be > 0");
  int64_t n = model.n_params();
  ParamVector out(static_cast<size_t>(n));
#pragma omp parallel
  {
    ParamVector wp = w;
#pragma omp for schedule(static)
    for (int64_t k = 0; k < n; ++k) {
      wp[static_cast<size_t>(k)] = w[static_cast<size_t>(k)] + h;
      double lp = batch_loss_serial(model, wp, batch);
      wp[static_cast<size_t>(k)] = w[static_cast<size_t>(k)] - h;
      double lm = batch_loss_serial(model, wp, batch);
      wp[static_cast<size_t>(k)] = w[static_cast<size_t>(k)];
      out[static_cast<size_t>(k)] = (lp - lm) / (2.0 * h);
    }
  }
  return out;
}

}  // namespace lsgd
