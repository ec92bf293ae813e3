// SPDX-License-Identifier: Apache-2.0
#include "lsgd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lsgd {

namespace {

int ceil_log2(int p) {
  int bits = 0;
  int v = 1;
  while (v < p) {
    v *= 2;
    ++bits;
  }
  return bits;
}

double linear_phase(int p, double n_bytes, double alpha, double beta) {
  return static_cast<double>(p - 1) * (alpha + n_bytes * beta);
}

}  // namespace

const char* collective_algo_name(CollectiveAlgo a) {
  switch (a) {
    case CollectiveAlgo::ring: return "ring";
    case CollectiveAlgo::tree: return "tree";
    case CollectiveAlgo::linear: return "linear";
  }
  return "?";
}

CollectiveAlgo collective_algo_from_name(const std::string& name) {
  if (name == "ring") return CollectiveAlgo::ring;
  if (name == "tree") return CollectiveAlgo::tree;
  if (name == "linear") return CollectiveAlgo::linear;
  throw ConfigError(str_cat("allreduce_algo: expected ring|tree|linear, got '", name, "'"));
}

void CostModel::validate() const {
  check<ConfigError>(t_sample >= 0.0, "cost model: t_sample must be >= 0");
  check<ConfigError>(t_io >= 0.0, "cost model: t_io must be >= 0");
  check<ConfigError>(alpha >= 0.0 && beta >= 0.0, "cost model: alpha/beta must be >= 0");
  check<ConfigError>(alpha_local >= 0.0 && beta_local >= 0.0,
                     "cost model: alpha_local/beta_local must be >= 0");
  check<ConfigError>(bytes_per_param >= 1, "cost model: bytes_per_param must be >= 1");
  check<ConfigError>(n_params >= 1, "cost model: n_params must be >= 1");
}

double collective_time(const CostModel& cost, int p, double n_bytes, CollectiveAlgo algo) {
  check(p >= 1, "collective_time: p must be >= 1");
  check(n_bytes >= 0.0, "collective_time: n_bytes must be >= 0");
  if (p == 1) return 0.0;
  switch (algo) {
    case CollectiveAlgo::ring:
      return 2.0 * (p - 1) * cost.alpha +
             2.0 * (static_cast<double>(p - 1) / p) * n_bytes * cost.beta;
    case CollectiveAlgo::tree:
      return 2.0 * ceil_log2(p) * (cost.alpha + n_bytes * cost.beta);
    case CollectiveAlgo::linear:
      return linear_phase(p, n_bytes, cost.alpha, cost.beta);
  }
  throw Error("collective_time: unknown algorithm");
}

double collective_time(const CostModel& cost, int p, double n_bytes) {
  return collective_time(cost, p, n_bytes, cost.allreduce_algo);
}

double iter_time_csgd(const CostModel& cost, int n_workers, int local_batch) {
  check(n_workers >= 1, "iter_time_csgd: n_workers must be >= 1");
  return cost.t_io + local_batch * cost.t_sample +
         collective_time(cost, n_workers, cost.payload_bytes());
}

double iter_time_lsgd(const CostModel& cost, int n_workers, int n_groups, int local_batch) {
  check(n_workers >= 1 && n_groups >= 1, "iter_time_lsgd: counts must be >= 1");
  check(n_workers % n_groups == 0, "iter_time_lsgd: n_groups (", n_groups,
        ") must divide n_workers (", n_workers, ")");
  int per_group = n_workers / n_groups + 1;  // workers plus their communicator
  double local = 2.0 * linear_phase(per_group, cost.payload_bytes(), cost.alpha_local, cost.beta_local);
  double global = collective_time(cost, n_groups, cost.payload_bytes());
  return std::max(cost.t_io, global) + local_batch * cost.t_sample + local;
}

std::vector<SweepRow> sweep(const CostModel& cost, const std::vector<int>& worker_counts,
                            int group_size, int local_batch) {
  cost.validate();
  check<ConfigError>(!worker_counts.empty(), "sweep: worker list is empty");
  check<ConfigError>(group_size >= 1, "sweep: group_size must be >= 1");
  for (int n : worker_counts) check<ConfigError>(n >= 1, "sweep: worker counts must be >= 1");

  std::vector<int> counts = worker_counts;
  std::sort(counts.begin(), counts.end());

  std::vector<SweepRow> rows;
  double csgd_base_per_worker = 0.0;
  double lsgd_base_per_worker = 0.0;
  for (int n : counts) {
    {
      SweepRow row;
      row.n_workers = n;
      row.algorithm = "csgd";
      row.iter_time_s = iter_time_csgd(cost, n, local_batch);
      row.allreduce_time_s = collective_time(cost, n, cost.payload_bytes());
      row.throughput_sps = static_cast<double>(n) * local_batch / row.iter_time_s;
      double per_worker = row.throughput_sps / n;
      if (csgd_base_per_worker == 0.0) csgd_base_per_worker = per_worker;
      row.efficiency_percent = 100.0 * per_worker / csgd_base_per_worker;
      rows.push_back(std::move(row));
    }
    if (n % group_size == 0) {
      SweepRow row;
      row.n_workers = n;
      row.algorithm = "lsgd";
      int n_groups = n / group_size;
      row.iter_time_s = iter_time_lsgd(cost, n, n_groups, local_batch);
      row.allreduce_time_s = collective_time(cost, n_groups, cost.payload_bytes());
      row.throughput_sps = static_cast<double>(n) * local_batch / row.iter_time_s;
      double per_worker = row.throughput_sps / n;
      if (lsgd_base_per_worker == 0.0) lsgd_base_per_worker = per_worker;
      row.efficiency_percent = 100.0 * per_worker / lsgd_base_per_worker;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

CalibrationResult calibrate(const std::vector<MeasuredRow>& measured, const CalibrateOptions& opts) {
  check<ConfigError>(opts.n_params >= 1, "calibrate: n_params must be >= 1");
  check<ConfigError>(opts.bytes_per_param >= 1, "calibrate: bytes_per_param must be >= 1");
  check<ConfigError>(opts.local_batch >= 1, "calibrate: local_batch must be >= 1");
  check<ConfigError>(opts.io_fraction >= 0.0 && opts.io_fraction <= 1.0,
                     "calibrate: io_fraction must be in [0, 1]");

  std::set<int> distinct;
  for (const MeasuredRow& row : measured) {
    check<ConfigError>(row.n_workers >= 1, "calibrate: n_workers must be >= 1");
    distinct.insert(row.n_workers);
  }
  check<ConfigError>(distinct.size() >= 2, "calibrate: need rows at >= 2 distinct worker counts, got ",
                     distinct.size());

  CostModel model;
  model.n_params = opts.n_params;
  model.bytes_per_param = opts.bytes_per_param;
  model.allreduce_algo = opts.algo;
  double bytes = model.payload_bytes();

  // Features of y = a*alpha + b*beta per the collective formula.
  auto features = [&](int p, double& a, double& b) {
    switch (opts.algo) {
      case CollectiveAlgo::ring:
        a = 2.0 * (p - 1);
        b = 2.0 * (static_cast<double>(p - 1) / p) * bytes;
        return;
      case CollectiveAlgo::tree:
        a = 0.0;
        b = 2.0 * ceil_log2(p) * bytes;
        return;
      case CollectiveAlgo::linear:
        a = 0.0;
        b = static_cast<double>(p - 1) * bytes;
        return;
    }
  };

  double saa = 0.0, sab = 0.0, sbb = 0.0, say = 0.0, sby = 0.0;
  for (const MeasuredRow& row : measured) {
    double a = 0.0, b = 0.0;
    features(row.n_workers, a, b);
    saa += a * a;
    sab += a * b;
    sbb += b * b;
    say += a * row.allreduce_time_s;
    sby += b * row.allreduce_time_s;
  }

  if (opts.algo == CollectiveAlgo::ring) {
    double det = saa * sbb - sab * sab;
    check<ConfigError>(std::abs(det) > 1e-30 * std::max(1.0, saa * sbb),
                       "calibrate: normal equations are singular; rows do not span alpha and beta");
    model.alpha = (say * sbb - sby * sab) / det;
    model.beta = (saa * sby - sab * say) / det;
  } else {
    // alpha and beta enter tree/linear identically; attribute the per-hop
    // cost to the bandwidth term.
    check<ConfigError>(sbb > 0.0, "calibrate: degenerate rows");
    model.alpha = 0.0;
    model.beta = sby / sbb;
  }
  model.alpha = std::max(model.alpha, 0.0);
  model.beta = std::max(model.beta, 0.0);

  CalibrationResult result;
  double residual_sum = 0.0;
  for (const MeasuredRow& row : measured) {
    double fit = collective_time(model, row.n_workers, bytes);
    double r = row.allreduce_time_s - fit;
    result.allreduce_residuals_s.push_back(r);
    result.max_abs_residual_s = std::max(result.max_abs_residual_s, std::abs(r));
    residual_sum += row.train_time_s - fit;
  }
  double compute_io = std::max(residual_sum / static_cast<double>(measured.size()), 0.0);
  model.t_io = opts.io_fraction * compute_io;
  model.t_sample = (1.0 - opts.io_fraction) * compute_io / opts.local_batch;

  result.model = model;
  return result;
}

}  // namespace lsgd
