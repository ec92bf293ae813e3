// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsgd/common.hpp"
#include "lsgd/dataset.hpp"
#include "lsgd/mlp.hpp"
#include "lsgd/optimizer.hpp"
#include "lsgd/transport.hpp"

namespace lsgd {

enum class Algorithm { sequential, csgd, lsgd };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// N workers in G groups. Worker ranks are 0..N-1; LSGD adds one communicator
// rank per group, numbered N..N+G-1, so the LSGD world size is N+G.
struct Topology {
  int n_workers = 1;
  int n_groups = 1;

  void validate(Algorithm algo) const;
  int workers_per_group() const { return n_workers / n_groups; }
  int world_size(Algorithm algo) const;
  Role role_of(Algorithm algo, int rank) const;
  int group_of(Algorithm algo, int rank) const;
  int communicator_of(int group) const { return n_workers + group; }

  CommGroup all_workers() const;          // flat CSGD group, root = 0
  CommGroup local_group(int group) const; // group's workers + its communicator (root)
  CommGroup communicators() const;        // LSGD global group, root = lowest
};

struct DataSpec {
  enum class Source { synthetic, csv };
  Source source = Source::synthetic;
  int64_t n_samples = 5000;
  int n_features = 32;
  int n_classes = 10;
  double spread = 10.0;
  std::string path;  // csv source
};

struct DelaySpec {
  double io_delay_s = 0.0;           // injected per-iteration data-loading latency
  double global_link_delay_s = 0.0;  // injected latency ahead of the global allreduce
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::sequential;
  Topology topology;
  MlpModel model;
  DataSpec data;
  HyperParams optim;
  int local_batch = 64;
  int epochs = 1;
  int64_t iterations = 0;  // when 0, derived as epochs * floor(|X| / global_batch)
  uint64_t seed = 42;
  double init_scale = 0.05;
  DelaySpec delays;
  double collective_timeout_s = 30.0;
  bool record_history = false;  // keep per-iteration parameter snapshots on workers
  // Default: one shared minibatch drawn from a common stream and partitioned
  // into shards, which is what makes iterates comparable across executors.
  // When false, each worker samples its own local minibatch from a rank-keyed
  // stream (seed + 3 + rank).
  bool shared_minibatch = true;

  int global_batch() const { return local_batch * topology.n_workers; }
  int64_t resolve_iterations(int64_t dataset_size) const;
  double epoch_float(int64_t iteration, int64_t dataset_size) const;
  void validate() const;
};

// Seed derivation, shared by every rank so all replicas see identical
// streams: dataset = seed, parameter init = seed + 1, sampler = seed + 2.
Dataset make_dataset(const TrainConfig& cfg);

enum class TrainPhase : int { io = 0, compute, local_reduce, global_allreduce, broadcast, update };
constexpr int kNumPhases = 6;

struct PhaseSpan {
  double begin = 0.0;
  double end = 0.0;
  double duration() const { return end - begin; }
  bool present() const { return end > begin; }
  bool overlaps(const PhaseSpan& other) const { return begin < other.end && other.begin < end; }
};

// One iteration's phase spans, attributed to the update produced at that
// iteration (in LSGD the broadcast/update/global-allreduce of iteration t
// physically execute during block t+1; they are recorded under row t).
struct RankIteration {
  std::array<PhaseSpan, kNumPhases> phase{};
  double block_begin = 0.0;
  double block_end = 0.0;
  int64_t version_at_compute = -1;  // parameter updates applied before the gradient pass
};

struct RankResult {
  int rank = 0;
  Role role = Role::worker;
  std::vector<RankIteration> iterations;
  std::vector<double> loss;  // workers: minibatch mean loss per iteration
  std::vector<double> lr;
  ParamVector final_params;                // workers
  std::vector<ParamVector> param_history;  // workers, when record_history: w_1..w_T
  double total_wall_s = 0.0;
};

struct IterationRow {
  double lr = 0.0;
  double loss = 0.0;
  std::array<PhaseSpan, kNumPhases> phase{};
  double iter_wall_s = 0.0;
};

struct TrainResult {
  ParamVector initial_params;
  ParamVector final_params;
  std::vector<double> loss_history;
  std::vector<IterationRow> rows;
  std::vector<ParamVector> param_history;  // worker 0: w_0..w_T when recorded
  double total_wall_s = 0.0;
  double throughput_sps = 0.0;
  std::vector<RankResult> ranks;
};

// Runs the configured world in-process, one thread per rank, and merges the
// per-rank results. The three algorithms share minibatch, learning-rate and
// initialization streams, which is what makes their iterates comparable.
TrainResult run_train(const TrainConfig& cfg);

// Entry point for one externally-connected rank (TCP worlds): executes this
// rank's program against an existing endpoint. `ep` may be null only for
// sequential runs.
RankResult run_rank(const TrainConfig& cfg, const Dataset& data, Endpoint* ep, int rank,
                    double epoch_offset_s = 0.0);

struct EquivalenceEntry {
  std::string name;
  double max_rel_deviation = 0.0;  // over all iterations and coordinates
  int64_t worst_iteration = -1;
  bool bitwise_equal = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceEntry> entries;  // entry 0 is the reference run
  double tolerance = 1e-8;
  bool pass = false;
};

// Runs every config with history recording and compares the iterate history
// of each run against the first (reference) config, coordinate-wise:
// |w_ref[k] - w[k]| / max(|w_ref[k]|, 1e-8). Configs must share seed, model,
// data, hyperparameters and global batch, and use the plain update mode.
EquivalenceReport verify_equivalence(const std::vector<TrainConfig>& configs, double tolerance = 1e-8);

}  // namespace lsgd
