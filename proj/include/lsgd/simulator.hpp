// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsgd/common.hpp"

namespace lsgd {

enum class CollectiveAlgo { ring, tree, linear };

const char* collective_algo_name(CollectiveAlgo a);
CollectiveAlgo collective_algo_from_name(const std::string& name);

// Closed-form per-iteration cost model. alpha/beta describe the inter-group
// links used by the flat CSGD allreduce and the LSGD communicator allreduce;
// alpha_local/beta_local describe intra-group links used by the LSGD reduce
// and broadcast phases.
struct CostModel {
  double t_sample = 0.0;  // seconds per training sample (fwd+bwd)
  double t_io = 0.0;      // seconds per iteration for data loading
  double alpha = 0.0;     // per-hop latency, seconds
  double beta = 0.0;      // seconds per byte
  int bytes_per_param = 4;
  int64_t n_params = 1;
  CollectiveAlgo allreduce_algo = CollectiveAlgo::ring;
  double alpha_local = 0.0;
  double beta_local = 0.0;

  double payload_bytes() const { return static_cast<double>(n_params) * bytes_per_param; }
  void validate() const;
};

// Allreduce cost over p members moving n_bytes:
//   ring:   2(p-1) alpha + 2((p-1)/p) n_bytes beta
//   tree:   2 ceil(log2 p) (alpha + n_bytes beta)
//   linear: (p-1) (alpha + n_bytes beta)
// p = 1 costs nothing for every algorithm.
double collective_time(const CostModel& cost, int p, double n_bytes, CollectiveAlgo algo);
double collective_time(const CostModel& cost, int p, double n_bytes);

// CSGD: io + compute + flat allreduce, all serial.
double iter_time_csgd(const CostModel& cost, int n_workers, int local_batch);

// LSGD: the global allreduce among n_groups communicators hides behind data
// loading (max term); the local reduce and broadcast are two rooted linear
// phases over workers_per_group + 1 members on intra-group links.
double iter_time_lsgd(const CostModel& cost, int n_workers, int n_groups, int local_batch);

struct SweepRow {
  int n_workers = 0;
  std::string algorithm;
  double iter_time_s = 0.0;
  double allreduce_time_s = 0.0;  // global collective share of the iteration
  double throughput_sps = 0.0;
  double efficiency_percent = 0.0;
};

// Throughput and per-worker scaling efficiency for both algorithms across
// worker counts. Efficiency is normalized per algorithm against the smallest
// count in the sweep. LSGD rows are emitted only where group_size divides the
// worker count.
std::vector<SweepRow> sweep(const CostModel& cost, const std::vector<int>& worker_counts,
                            int group_size, int local_batch);

struct MeasuredRow {
  int n_workers = 0;
  double train_time_s = 0.0;      // per-iteration wall time
  double allreduce_time_s = 0.0;  // per-iteration allreduce time
};

struct CalibrateOptions {
  CollectiveAlgo algo = CollectiveAlgo::ring;
  int64_t n_params = 1;
  int bytes_per_param = 4;
  int local_batch = 64;
  // The residual (train - allreduce) fixes only t_io + local_batch * t_sample;
  // io_fraction decides the split.
  double io_fraction = 0.5;
};

struct CalibrationResult {
  CostModel model;
  std::vector<double> allreduce_residuals_s;  // per input row, measured - fitted
  double max_abs_residual_s = 0.0;
};

// Least-squares fit of (alpha, beta) against the chosen collective formula,
// then (t_io, t_sample) from the mean compute residual. Requires at least two
// distinct worker counts. Note the tree and linear formulas scale alpha and
// n_bytes*beta identically, so only their sum is identifiable; those fits
// attribute everything to beta and are reported with alpha = 0.
CalibrationResult calibrate(const std::vector<MeasuredRow>& measured, const CalibrateOptions& opts);

}  // namespace lsgd
