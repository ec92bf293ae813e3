// SPDX-License-Identifier: Apache-2.0
#include "lsgd/executors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <thread>

#include "lsgd/inprocess.hpp"
#include "lsgd/sampler.hpp"

namespace lsgd {

namespace {

using Clock = std::chrono::steady_clock;

struct Stopwatch {
  Clock::time_point t0;
  double now() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

void sleep_s(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

const char* phase_name(TrainPhase p) {
  switch (p) {
    case TrainPhase::io: return "io";
    case TrainPhase::compute: return "compute";
    case TrainPhase::local_reduce: return "local_reduce";
    case TrainPhase::global_allreduce: return "global_allreduce";
    case TrainPhase::broadcast: return "broadcast";
    case TrainPhase::update: return "update";
  }
  return "?";
}

// Which phase this rank is currently executing, for error reports.
thread_local const char* t_current_phase = "setup";

template <typename F>
PhaseSpan timed(const Stopwatch& sw, TrainPhase p, F&& f) {
  t_current_phase = phase_name(p);
  PhaseSpan span;
  span.begin = sw.now();
  f();
  span.end = sw.now();
  t_current_phase = "between-phases";
  return span;
}

PhaseSpan& at(RankIteration& it, TrainPhase p) { return it.phase[static_cast<size_t>(p)]; }

// Gradient-plus-loss payload: the shard loss rides in one extra slot so the
// same reduction that averages gradients also averages the minibatch loss.
ParamVector make_payload(BatchGrad&& bg) {
  ParamVector payload = std::move(bg.grad);
  payload.push_back(bg.mean_loss);
  return payload;
}

// A worker's source of shard indices: either its slice of one shared global
// minibatch, or an independent rank-keyed stream of local minibatches.
class ShardSource {
 public:
  ShardSource(const TrainConfig& cfg, const Dataset& data, int worker_rank)
      : cfg_(cfg),
        worker_rank_(worker_rank),
        sampler_(data.n_samples,
                 Rng(cfg.shared_minibatch ? cfg.seed + 2 : cfg.seed + 3 + static_cast<uint64_t>(worker_rank))) {}

  std::vector<int32_t> next() {
    if (!cfg_.shared_minibatch) return sampler_.draw(cfg_.local_batch).indices;
    Minibatch mb = sampler_.draw(cfg_.global_batch());
    return partition_minibatch(mb, cfg_.topology.n_workers)[static_cast<size_t>(worker_rank_)].indices;
  }

 private:
  const TrainConfig& cfg_;
  int worker_rank_;
  MinibatchSampler sampler_;
};

RankResult run_sequential_rank(const TrainConfig& cfg, const Dataset& data, const Stopwatch& sw) {
  RankResult rr;
  rr.rank = 0;
  rr.role = Role::worker;

  const MlpModel& model = cfg.model;
  ParamVector w = init_params(model, Rng(cfg.seed + 1), cfg.init_scale);
  MinibatchSampler sampler(data.n_samples, Rng(cfg.seed + 2));
  OptimizerState opt;
  int64_t T = cfg.resolve_iterations(data.n_samples);
  rr.iterations.resize(static_cast<size_t>(T));

  for (int64_t t = 0; t < T; ++t) {
    RankIteration& it = rr.iterations[static_cast<size_t>(t)];
    it.block_begin = sw.now();

    Minibatch mb;
    at(it, TrainPhase::io) = timed(sw, TrainPhase::io, [&] {
      sleep_s(cfg.delays.io_delay_s);
      mb = sampler.draw(cfg.global_batch());
    });

    BatchGrad bg;
    it.version_at_compute = opt.iteration;
    at(it, TrainPhase::compute) = timed(sw, TrainPhase::compute, [&] {
      bg = batch_gradient(model, w, BatchView{&data, mb.indices});
    });

    double lr = learning_rate(cfg.optim, cfg.topology.n_workers, cfg.local_batch,
                              cfg.epoch_float(t, data.n_samples));
    at(it, TrainPhase::update) = timed(sw, TrainPhase::update, [&] {
      sgd_update(w, bg.grad, opt, cfg.optim, lr);
    });
    check_finite(w, "parameters after update");

    rr.loss.push_back(bg.mean_loss);
    rr.lr.push_back(lr);
    if (cfg.record_history) rr.param_history.push_back(w);
    it.block_end = sw.now();
  }
  rr.final_params = std::move(w);
  rr.total_wall_s = sw.now();
  return rr;
}

RankResult run_csgd_worker(const TrainConfig& cfg, const Dataset& data, Endpoint& ep, int rank,
                           const Stopwatch& sw) {
  RankResult rr;
  rr.rank = rank;
  rr.role = Role::worker;

  const MlpModel& model = cfg.model;
  const int n_workers = cfg.topology.n_workers;
  const int64_t n_params = model.n_params();
  ParamVector w = init_params(model, Rng(cfg.seed + 1), cfg.init_scale);
  ShardSource shards(cfg, data, rank);
  OptimizerState opt;
  int64_t T = cfg.resolve_iterations(data.n_samples);
  rr.iterations.resize(static_cast<size_t>(T));
  CommGroup world = cfg.topology.all_workers();

  for (int64_t t = 0; t < T; ++t) {
    RankIteration& it = rr.iterations[static_cast<size_t>(t)];
    it.block_begin = sw.now();

    std::vector<int32_t> shard;
    at(it, TrainPhase::io) = timed(sw, TrainPhase::io, [&] {
      sleep_s(cfg.delays.io_delay_s);
      shard = shards.next();
    });

    BatchGrad bg;
    it.version_at_compute = opt.iteration;
    at(it, TrainPhase::compute) = timed(sw, TrainPhase::compute, [&] {
      bg = batch_gradient(model, w, BatchView{&data, shard});
    });
    ParamVector payload = make_payload(std::move(bg));

    ParamVector summed;
    at(it, TrainPhase::global_allreduce) = timed(sw, TrainPhase::global_allreduce, [&] {
      sleep_s(cfg.delays.global_link_delay_s);
      summed = allreduce(ep, world, payload);
    });
    for (double& v : summed) v /= static_cast<double>(n_workers);

    double lr = learning_rate(cfg.optim, n_workers, cfg.local_batch,
                              cfg.epoch_float(t, data.n_samples));
    at(it, TrainPhase::update) = timed(sw, TrainPhase::update, [&] {
      sgd_update(w, std::span<const double>(summed).first(static_cast<size_t>(n_params)), opt,
                 cfg.optim, lr);
    });
    check_finite(w, "parameters after update");

    rr.loss.push_back(summed[static_cast<size_t>(n_params)]);
    rr.lr.push_back(lr);
    if (cfg.record_history) rr.param_history.push_back(w);
    it.block_end = sw.now();
  }
  rr.final_params = std::move(w);
  rr.total_wall_s = sw.now();
  return rr;
}

// LSGD worker: the parameter update for iteration t is postponed into block
// t+1, after the next minibatch has been drawn, so the communicators' global
// allreduce runs while workers are loading data.
RankResult run_lsgd_worker(const TrainConfig& cfg, const Dataset& data, Endpoint& ep, int rank,
                           const Stopwatch& sw) {
  RankResult rr;
  rr.rank = rank;
  rr.role = Role::worker;

  const MlpModel& model = cfg.model;
  const int n_workers = cfg.topology.n_workers;
  const int64_t n_params = model.n_params();
  ParamVector w = init_params(model, Rng(cfg.seed + 1), cfg.init_scale);
  ShardSource shards(cfg, data, rank);
  OptimizerState opt;
  int64_t T = cfg.resolve_iterations(data.n_samples);
  rr.iterations.resize(static_cast<size_t>(T));
  int group = cfg.topology.group_of(Algorithm::lsgd, rank);
  CommGroup local = cfg.topology.local_group(group);

  auto apply_update = [&](int64_t u) {
    RankIteration& row = rr.iterations[static_cast<size_t>(u)];
    ParamVector averaged;
    at(row, TrainPhase::broadcast) = timed(sw, TrainPhase::broadcast, [&] {
      averaged = broadcast(ep, local, {});
    });
    check<TransportError>(static_cast<int64_t>(averaged.size()) == n_params + 1,
                          "lsgd: broadcast payload has length ", averaged.size(), ", expected ",
                          n_params + 1);
    double lr = learning_rate(cfg.optim, n_workers, cfg.local_batch,
                              cfg.epoch_float(u, data.n_samples));
    at(row, TrainPhase::update) = timed(sw, TrainPhase::update, [&] {
      sgd_update(w, std::span<const double>(averaged).first(static_cast<size_t>(n_params)), opt,
                 cfg.optim, lr);
    });
    check_finite(w, "parameters after update");
    rr.loss.push_back(averaged[static_cast<size_t>(n_params)]);
    rr.lr.push_back(lr);
    if (cfg.record_history) rr.param_history.push_back(w);
  };

  for (int64_t t = 0; t < T; ++t) {
    RankIteration& it = rr.iterations[static_cast<size_t>(t)];
    it.block_begin = sw.now();

    std::vector<int32_t> shard;
    at(it, TrainPhase::io) = timed(sw, TrainPhase::io, [&] {
      sleep_s(cfg.delays.io_delay_s);
      shard = shards.next();
    });

    // Postponed update for the previous iteration arrives after data loading.
    if (t >= 1) apply_update(t - 1);

    BatchGrad bg;
    it.version_at_compute = opt.iteration;
    at(it, TrainPhase::compute) = timed(sw, TrainPhase::compute, [&] {
      bg = batch_gradient(model, w, BatchView{&data, shard});
    });
    ParamVector payload = make_payload(std::move(bg));

    at(it, TrainPhase::local_reduce) = timed(sw, TrainPhase::local_reduce, [&] {
      reduce_to_root(ep, local, payload);
    });
    it.block_end = sw.now();
  }
  if (T >= 1) apply_update(T - 1);  // drain the pending update

  rr.final_params = std::move(w);
  rr.total_wall_s = sw.now();
  return rr;
}

RankResult run_lsgd_communicator(const TrainConfig& cfg, const Dataset& data, Endpoint& ep,
                                 int rank, const Stopwatch& sw) {
  RankResult rr;
  rr.rank = rank;
  rr.role = Role::communicator;

  const int n_workers = cfg.topology.n_workers;
  const int64_t n_params = cfg.model.n_params();
  int64_t T = cfg.resolve_iterations(data.n_samples);
  rr.iterations.resize(static_cast<size_t>(T));
  int group = cfg.topology.group_of(Algorithm::lsgd, rank);
  CommGroup local = cfg.topology.local_group(group);
  CommGroup global = cfg.topology.communicators();

  // The communicator contributes a zero vector and acts as the reduction root.
  ParamVector zero(static_cast<size_t>(n_params) + 1, 0.0);

  for (int64_t t = 0; t < T; ++t) {
    RankIteration& it = rr.iterations[static_cast<size_t>(t)];
    it.block_begin = sw.now();

    ParamVector summed;
    at(it, TrainPhase::local_reduce) = timed(sw, TrainPhase::local_reduce, [&] {
      summed = reduce_to_root(ep, local, zero);
      for (double& v : summed) v /= static_cast<double>(n_workers);
    });

    // Runs while the workers of this group are loading the next minibatch.
    ParamVector averaged;
    at(it, TrainPhase::global_allreduce) = timed(sw, TrainPhase::global_allreduce, [&] {
      sleep_s(cfg.delays.global_link_delay_s);
      averaged = allreduce(ep, global, summed);
    });

    at(it, TrainPhase::broadcast) = timed(sw, TrainPhase::broadcast, [&] {
      broadcast(ep, local, averaged);
    });
    it.block_end = sw.now();
  }
  rr.total_wall_s = sw.now();
  return rr;
}

RankResult run_rank_impl(const TrainConfig& cfg, const Dataset& data, Endpoint* ep, int rank,
                         const Stopwatch& sw) {
  switch (cfg.algorithm) {
    case Algorithm::sequential:
      return run_sequential_rank(cfg, data, sw);
    case Algorithm::csgd:
      check(ep != nullptr, "run_rank: csgd needs a transport endpoint");
      return run_csgd_worker(cfg, data, *ep, rank, sw);
    case Algorithm::lsgd: {
      check(ep != nullptr, "run_rank: lsgd needs a transport endpoint");
      Rank who{rank, cfg.topology.role_of(Algorithm::lsgd, rank)};
      if (who.role == Role::worker) {
        return run_lsgd_worker(cfg, data, *ep, who.id, sw);
      }
      return run_lsgd_communicator(cfg, data, *ep, who.id, sw);
    }
  }
  throw Error("run_rank: unknown algorithm");
}

TrainResult merge_results(const TrainConfig& cfg, const Dataset& data, std::vector<RankResult> rrs) {
  int64_t T = cfg.resolve_iterations(data.n_samples);
  TrainResult result;
  result.initial_params = init_params(cfg.model, Rng(cfg.seed + 1), cfg.init_scale);

  const RankResult& w0 = rrs[0];
  result.final_params = w0.final_params;
  result.loss_history = w0.loss;
  result.rows.resize(static_cast<size_t>(T));

  for (int64_t t = 0; t < T; ++t) {
    IterationRow& row = result.rows[static_cast<size_t>(t)];
    const RankIteration& it = w0.iterations[static_cast<size_t>(t)];
    row.lr = t < static_cast<int64_t>(w0.lr.size()) ? w0.lr[static_cast<size_t>(t)] : 0.0;
    row.loss = t < static_cast<int64_t>(w0.loss.size()) ? w0.loss[static_cast<size_t>(t)] : 0.0;
    row.phase = it.phase;
    row.iter_wall_s = it.block_end - it.block_begin;
    if (cfg.algorithm == Algorithm::lsgd) {
      // The global allreduce runs on the communicators; report the slowest.
      PhaseSpan widest{};
      for (const RankResult& rr : rrs) {
        if (rr.role != Role::communicator) continue;
        const PhaseSpan& span = rr.iterations[static_cast<size_t>(t)].phase[static_cast<size_t>(
            TrainPhase::global_allreduce)];
        if (span.duration() > widest.duration()) widest = span;
      }
      row.phase[static_cast<size_t>(TrainPhase::global_allreduce)] = widest;
    }
  }

  if (cfg.record_history) {
    result.param_history.reserve(static_cast<size_t>(T) + 1);
    result.param_history.push_back(result.initial_params);
    for (const ParamVector& w : w0.param_history) result.param_history.push_back(w);
  }

  for (const RankResult& rr : rrs) result.total_wall_s = std::max(result.total_wall_s, rr.total_wall_s);
  if (result.total_wall_s > 0.0 && T > 0) {
    result.throughput_sps =
        static_cast<double>(T) * static_cast<double>(cfg.global_batch()) / result.total_wall_s;
  }
  result.ranks = std::move(rrs);
  return result;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::sequential: return "sequential";
    case Algorithm::csgd: return "csgd";
    case Algorithm::lsgd: return "lsgd";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "sequential") return Algorithm::sequential;
  if (name == "csgd") return Algorithm::csgd;
  if (name == "lsgd") return Algorithm::lsgd;
  throw ConfigError(str_cat("algorithm: expected sequential|csgd|lsgd, got '", name, "'"));
}

void Topology::validate(Algorithm algo) const {
  check<ConfigError>(n_workers >= 1, "n_workers must be >= 1");
  check<ConfigError>(n_groups >= 1, "n_groups must be >= 1");
  if (algo == Algorithm::sequential) {
    check<ConfigError>(n_workers == 1, "sequential runs require n_workers = 1");
  }
  if (algo == Algorithm::lsgd) {
    check<ConfigError>(n_workers % n_groups == 0, "n_groups (", n_groups,
                       ") must divide n_workers (", n_workers, ")");
  }
}

int Topology::world_size(Algorithm algo) const {
  return algo == Algorithm::lsgd ? n_workers + n_groups : n_workers;
}

Role Topology::role_of(Algorithm algo, int rank) const {
  if (algo == Algorithm::lsgd && rank >= n_workers) return Role::communicator;
  return Role::worker;
}

int Topology::group_of(Algorithm algo, int rank) const {
  if (algo == Algorithm::lsgd && rank >= n_workers) return rank - n_workers;
  return rank / workers_per_group();
}

CommGroup Topology::all_workers() const {
  std::vector<int> members(static_cast<size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) members[static_cast<size_t>(i)] = i;
  return CommGroup::of(std::move(members), 0);
}

CommGroup Topology::local_group(int group) const {
  std::vector<int> members;
  int per = workers_per_group();
  for (int i = group * per; i < (group + 1) * per; ++i) members.push_back(i);
  members.push_back(communicator_of(group));
  return CommGroup::of(std::move(members), communicator_of(group));
}

CommGroup Topology::communicators() const {
  std::vector<int> members;
  for (int g = 0; g < n_groups; ++g) members.push_back(communicator_of(g));
  return CommGroup::of(std::move(members), communicator_of(0));
}

int64_t TrainConfig::resolve_iterations(int64_t dataset_size) const {
  if (iterations > 0) return iterations;
  int64_t per_epoch = dataset_size / global_batch();
  return static_cast<int64_t>(epochs) * per_epoch;
}

double TrainConfig::epoch_float(int64_t iteration, int64_t dataset_size) const {
  return static_cast<double>(iteration) * static_cast<double>(global_batch()) /
         static_cast<double>(dataset_size);
}

void TrainConfig::validate() const {
  topology.validate(algorithm);
  model.validate();
  optim.validate();
  check<ConfigError>(local_batch >= 1, "local_batch must be >= 1");
  check<ConfigError>(epochs >= 0, "epochs must be >= 0");
  check<ConfigError>(iterations >= 0, "iterations must be >= 0");
  check<ConfigError>(init_scale >= 0.0, "init_scale must be >= 0");
  check<ConfigError>(delays.io_delay_s >= 0.0 && delays.global_link_delay_s >= 0.0,
                     "delays must be >= 0");
  check<ConfigError>(collective_timeout_s > 0.0, "transport.timeout_s must be > 0");
  if (data.source == DataSpec::Source::csv) {
    check<ConfigError>(!data.path.empty(), "data.path is required when data.source is csv");
  } else {
    check<ConfigError>(data.n_samples >= 1, "data.n_samples must be >= 1");
    check<ConfigError>(data.n_features == model.input_dim(), "data.n_features (", data.n_features,
                       ") must match model input dim (", model.input_dim(), ")");
    check<ConfigError>(data.n_classes == model.n_classes(), "data.n_classes (", data.n_classes,
                       ") must match model class count (", model.n_classes(), ")");
  }
}

Dataset make_dataset(const TrainConfig& cfg) {
  if (cfg.data.source == DataSpec::Source::csv) return load_csv(cfg.data.path);
  return generate_synthetic(cfg.seed, cfg.data.n_samples, cfg.data.n_features, cfg.data.n_classes,
                            cfg.data.spread);
}

RankResult run_rank(const TrainConfig& cfg, const Dataset& data, Endpoint* ep, int rank,
                    double epoch_offset_s) {
  Stopwatch sw{Clock::now() -
               std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(epoch_offset_s))};
  return run_rank_impl(cfg, data, ep, rank, sw);
}

TrainResult run_train(const TrainConfig& cfg) {
  cfg.validate();
  Dataset data = make_dataset(cfg);
  check<ConfigError>(cfg.global_batch() <= data.n_samples, "global batch ", cfg.global_batch(),
                     " exceeds dataset size ", data.n_samples);
  check<ConfigError>(data.n_features == cfg.model.input_dim(), "dataset has ", data.n_features,
                     " features but model.layer_sizes expects ", cfg.model.input_dim());
  check<ConfigError>(data.n_classes <= cfg.model.n_classes(), "dataset labels span ", data.n_classes,
                     " classes but the model outputs ", cfg.model.n_classes());

  int world = cfg.topology.world_size(cfg.algorithm);
  std::vector<RankResult> rrs(static_cast<size_t>(world));
  Stopwatch sw{Clock::now()};

  if (cfg.algorithm == Algorithm::sequential) {
    rrs[0] = run_rank_impl(cfg, data, nullptr, 0, sw);
  } else {
    InProcessRouter router(world, cfg.collective_timeout_s);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(world));
    threads.reserve(static_cast<size_t>(world));
    for (int r = 0; r < world; ++r) {
      threads.emplace_back([&, r] {
        try {
          InProcessEndpoint ep = router.endpoint(r);
          rrs[static_cast<size_t>(r)] = run_rank_impl(cfg, data, &ep, r, sw);
        } catch (const std::exception& e) {
          errors[static_cast<size_t>(r)] = std::make_exception_ptr(
              Error(str_cat("rank ", r, " in phase ", t_current_phase, ": ", e.what())));
        } catch (...) {
          errors[static_cast<size_t>(r)] = std::current_exception();
        }
      });
    }
    for (std::thread& th : threads) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return merge_results(cfg, data, std::move(rrs));
}

EquivalenceReport verify_equivalence(const std::vector<TrainConfig>& configs, double tolerance) {
  check<ConfigError>(configs.size() >= 2, "verify: need at least two configs");
  const TrainConfig& ref = configs.front();
  for (const TrainConfig& cfg : configs) {
    cfg.validate();
    check<ConfigError>(cfg.optim.mode == UpdateMode::plain,
                       "verify: iterate comparison requires optim.mode = plain");
    check<ConfigError>(cfg.shared_minibatch,
                       "verify: iterate comparison requires the shared-minibatch mode");
    check<ConfigError>(cfg.seed == ref.seed, "verify: configs disagree on seed");
    check<ConfigError>(cfg.model.layer_sizes == ref.model.layer_sizes,
                       "verify: configs disagree on model.layer_sizes");
    check<ConfigError>(cfg.global_batch() == ref.global_batch(),
                       "verify: configs disagree on global batch");
    check<ConfigError>(cfg.epochs == ref.epochs && cfg.iterations == ref.iterations,
                       "verify: configs disagree on iteration count");
    check<ConfigError>(cfg.init_scale == ref.init_scale, "verify: configs disagree on init_scale");
    check<ConfigError>(cfg.optim.base_lr == ref.optim.base_lr &&
                           cfg.optim.warmup_epochs == ref.optim.warmup_epochs &&
                           cfg.optim.decay_every_epochs == ref.optim.decay_every_epochs &&
                           cfg.optim.decay_factor == ref.optim.decay_factor,
                       "verify: configs disagree on the learning-rate schedule");
    check<ConfigError>(cfg.data.source == ref.data.source && cfg.data.n_samples == ref.data.n_samples &&
                           cfg.data.n_features == ref.data.n_features &&
                           cfg.data.n_classes == ref.data.n_classes && cfg.data.spread == ref.data.spread &&
                           cfg.data.path == ref.data.path,
                       "verify: configs disagree on the dataset");
  }

  EquivalenceReport report;
  report.tolerance = tolerance;

  std::vector<TrainResult> results;
  results.reserve(configs.size());
  for (const TrainConfig& cfg : configs) {
    TrainConfig recording = cfg;
    recording.record_history = true;
    results.push_back(run_train(recording));
  }

  const std::vector<ParamVector>& ref_hist = results.front().param_history;
  report.pass = true;
  for (size_t i = 0; i < configs.size(); ++i) {
    EquivalenceEntry entry;
    entry.name = str_cat(algorithm_name(configs[i].algorithm), " N=", configs[i].topology.n_workers,
                         " G=", configs[i].topology.n_groups);
    const std::vector<ParamVector>& hist = results[i].param_history;
    check<ConfigError>(hist.size() == ref_hist.size(), "verify: iterate history length mismatch");
    entry.bitwise_equal = true;
    for (size_t t = 0; t < hist.size(); ++t) {
      const ParamVector& a = ref_hist[t];
      const ParamVector& b = hist[t];
      for (size_t k = 0; k < a.size(); ++k) {
        if (std::memcmp(&a[k], &b[k], sizeof(double)) != 0) entry.bitwise_equal = false;
        double dev = std::abs(a[k] - b[k]) / std::max(std::abs(a[k]), 1e-8);
        if (dev > entry.max_rel_deviation) {
          entry.max_rel_deviation = dev;
          entry.worst_iteration = static_cast<int64_t>(t);
        }
      }
    }
    if (i > 0 && entry.max_rel_deviation > tolerance) report.pass = false;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace lsgd
