// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: train / verify / simulate / calibrate.
// Exit codes: 0 success, 1 runtime failure, 2 configuration failure.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lsgd/config.hpp"
#include "lsgd/metrics.hpp"
#include "lsgd/tcp.hpp"

namespace {

using namespace lsgd;

std::string self_exe_path() {
  char buf[4096];
  ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  check<Error>(n > 0, "cannot resolve own executable path");
  buf[n] = '\0';
  return buf;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    check<ConfigError>(!tok.empty(), "bad integer list '", text, "'");
    out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  check<ConfigError>(!out.empty(), "empty integer list");
  return out;
}

void print_train_summary(double final_loss, double throughput) {
  std::printf("final loss %.12g\n", final_loss);
  std::printf("mean throughput %.6g samples/s\n", throughput);
}

int run_tcp_rank(const RunConfig& rc, const std::string& config_path, int rank,
                 const std::string& rank_out) {
  (void)config_path;
  const TrainConfig& cfg = rc.train;
  int world = cfg.topology.world_size(cfg.algorithm);
  check<ConfigError>(static_cast<int>(rc.endpoints.size()) == world,
                     "transport.endpoints: expected ", world, " entries, got ", rc.endpoints.size());
  check<ConfigError>(rank >= 0 && rank < world, "--rank must be in [0, ", world, ")");

  Dataset data = make_dataset(cfg);
  const std::string& ep_str = rc.endpoints[static_cast<size_t>(rank)];
  size_t colon = ep_str.rfind(':');
  check<ConfigError>(colon != std::string::npos, "transport.endpoints[", rank, "]: expected host:port");
  std::string host = ep_str.substr(0, colon);
  uint16_t port = static_cast<uint16_t>(std::stoi(ep_str.substr(colon + 1)));

  TcpEndpoint ep(rank, TcpListener::bind_port(host, port), rc.endpoints, cfg.collective_timeout_s);
  RankResult rr = run_rank(cfg, data, &ep, rank);
  if (!rank_out.empty()) {
    write_rank_metrics_csv(rank_out, run_id_hex(rc.run_id), cfg, data.n_samples, rr);
  }
  if (rank == 0 && !rr.loss.empty()) {
    double wall = rr.total_wall_s;
    double tp = wall > 0.0 ? static_cast<double>(rr.loss.size()) * cfg.global_batch() / wall : 0.0;
    print_train_summary(rr.loss.back(), tp);
  }
  return 0;
}

int run_tcp_driver(const RunConfig& rc, const std::string& config_path, const std::string& out) {
  const TrainConfig& cfg = rc.train;
  int world = cfg.topology.world_size(cfg.algorithm);
  check<ConfigError>(static_cast<int>(rc.endpoints.size()) == world,
                     "transport.endpoints: expected ", world, " entries, got ", rc.endpoints.size());

  std::string exe = self_exe_path();
  std::vector<std::string> rank_files;
  std::vector<pid_t> pids;
  for (int r = 0; r < world; ++r) {
    rank_files.push_back(str_cat(out, ".rank", r));
    pid_t pid = ::fork();
    check<Error>(pid >= 0, "fork failed");
    if (pid == 0) {
      std::string rank_str = std::to_string(r);
      std::vector<const char*> argv = {exe.c_str(),        "train",
                                       config_path.c_str(), "--rank",
                                       rank_str.c_str(),    "--rank-out",
                                       rank_files.back().c_str(), nullptr};
      ::execv(exe.c_str(), const_cast<char* const*>(argv.data()));
      std::perror("execv");
      _exit(127);
    }
    pids.push_back(pid);
  }

  int failures = 0;
  for (pid_t pid : pids) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
  }
  check<Error>(failures == 0, failures, " rank process(es) failed");

  // Merge: worker 0's view, with the global allreduce column taken as the
  // max over communicator ranks (where the LSGD allreduce actually runs).
  CsvTable worker0 = read_csv(rank_files[0]);
  int c_ar = worker0.column("t_global_allreduce_s");
  if (cfg.algorithm == Algorithm::lsgd) {
    for (int r = cfg.topology.n_workers; r < world; ++r) {
      CsvTable comm = read_csv(rank_files[static_cast<size_t>(r)]);
      for (size_t i = 0; i < worker0.rows.size() && i < comm.rows.size(); ++i) {
        double cur = std::strtod(worker0.rows[i][static_cast<size_t>(c_ar)].c_str(), nullptr);
        double alt = std::strtod(comm.rows[i][static_cast<size_t>(c_ar)].c_str(), nullptr);
        if (alt > cur) worker0.rows[i][static_cast<size_t>(c_ar)] = comm.rows[i][static_cast<size_t>(c_ar)];
      }
    }
  }
  std::ofstream merged(out);
  check<Error>(merged.good(), "cannot open ", out, " for writing");
  merged << kMetricsHeader << '\n';
  for (const auto& row : worker0.rows) {
    for (size_t i = 0; i < row.size(); ++i) merged << (i ? "," : "") << row[i];
    merged << '\n';
  }
  std::printf("wrote %s (%zu rows, %d ranks)\n", out.c_str(), worker0.rows.size(), world);
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out, int rank,
              const std::string& rank_out) {
  RunConfig rc = load_run_config(config_path);
  rc.train.validate();

  if (rc.transport_backend == "tcp") {
    if (rank >= 0) return run_tcp_rank(rc, config_path, rank, rank_out);
    return run_tcp_driver(rc, config_path, out);
  }
  check<ConfigError>(rank < 0, "--rank requires transport.backend = tcp");

  TrainResult result = run_train(rc.train);
  Dataset data = make_dataset(rc.train);
  if (!out.empty()) {
    write_metrics_csv(out, run_id_hex(rc.run_id), rc.train, data.n_samples, result);
  }
  double final_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
  print_train_summary(final_loss, result.throughput_sps);
  return 0;
}

int cmd_verify(const std::string& config_path) {
  RunConfig rc = load_run_config(config_path);

  std::vector<VerifyRunSpec> specs = rc.verify.runs;
  if (specs.empty()) {
    specs.push_back({Algorithm::sequential, 1, 1});
    specs.push_back({Algorithm::csgd, rc.train.topology.n_workers, 1});
    specs.push_back({Algorithm::lsgd, rc.train.topology.n_workers, rc.train.topology.n_groups});
  }

  int global_batch = rc.train.global_batch();
  std::vector<TrainConfig> configs;
  for (const VerifyRunSpec& spec : specs) {
    TrainConfig cfg = rc.train;
    cfg.algorithm = spec.algorithm;
    cfg.topology.n_workers = spec.n_workers;
    cfg.topology.n_groups = spec.n_groups;
    cfg.optim.mode = UpdateMode::plain;
    check<ConfigError>(global_batch % spec.n_workers == 0, "verify: global batch ", global_batch,
                       " is not divisible across ", spec.n_workers, " workers");
    cfg.local_batch = global_batch / spec.n_workers;
    configs.push_back(std::move(cfg));
  }

  EquivalenceReport report = verify_equivalence(configs, rc.verify.tolerance);
  std::printf("%-24s %10s %12s %8s\n", "run", "max_rel_dev", "worst_iter", "bitwise");
  for (size_t i = 0; i < report.entries.size(); ++i) {
    const EquivalenceEntry& e = report.entries[i];
    std::printf("%-24s %10.3e %12lld %8s%s\n", e.name.c_str(), e.max_rel_deviation,
                static_cast<long long>(e.worst_iteration), e.bitwise_equal ? "yes" : "no",
                i == 0 ? "  (reference)" : "");
  }
  std::printf("tolerance %.3e: %s\n", report.tolerance, report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

int cmd_simulate(const std::string& model_path, const std::string& workers, int group_size,
                 int local_batch, const std::string& out) {
  CostModel model = load_cost_model(model_path);
  std::vector<int> counts = parse_int_list(workers);
  std::vector<SweepRow> rows = sweep(model, counts, group_size, local_batch);
  write_sweep_csv(out, rows);
  std::printf("wrote %s (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int cmd_calibrate(const std::string& measured_path, const std::string& algo, int64_t n_params,
                  int bytes_per_param, int local_batch, double io_fraction, const std::string& out) {
  std::vector<MeasuredRow> rows = read_measured_rows(measured_path);
  CalibrateOptions opts;
  opts.algo = collective_algo_from_name(algo);
  opts.n_params = n_params;
  opts.bytes_per_param = bytes_per_param;
  opts.local_batch = local_batch;
  opts.io_fraction = io_fraction;
  CalibrationResult result = calibrate(rows, opts);
  save_cost_model(result.model, out);
  std::printf("alpha %.6e s/hop, beta %.6e s/byte, t_sample %.6e s, t_io %.6e s\n",
              result.model.alpha, result.model.beta, result.model.t_sample, result.model.t_io);
  std::printf("max |allreduce residual| %.3e s over %zu rows; wrote %s\n",
              result.max_abs_residual_s, rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed SGD training engine with layered allreduce and a cost simulator"};
  app.require_subcommand(1);

  std::string config_path, out = "metrics.csv", rank_out;
  int rank = -1;
  CLI::App* train = app.add_subcommand("train", "run one training configuration");
  train->add_option("config", config_path, "JSON run configuration")->required();
  train->add_option("--out", out, "metrics CSV path");
  train->add_option("--rank", rank, "join a TCP world as this rank");
  train->add_option("--rank-out", rank_out, "per-rank metrics CSV path (TCP ranks)");

  std::string verify_config;
  CLI::App* verify = app.add_subcommand("verify", "check iterate equivalence across executors");
  verify->add_option("config", verify_config, "JSON run configuration")->required();

  std::string model_path, workers = "4,8,16,32,64,128,256", sweep_out = "sweep.csv";
  int group_size = 4, sim_local_batch = 64;
  CLI::App* simulate = app.add_subcommand("simulate", "sweep the analytic cost model");
  simulate->add_option("model", model_path, "cost model JSON")->required();
  simulate->add_option("--workers", workers, "comma-separated worker counts");
  simulate->add_option("--group-size", group_size, "workers per group for LSGD rows");
  simulate->add_option("--local-batch", sim_local_batch, "samples per worker per iteration");
  simulate->add_option("--out", sweep_out, "sweep CSV path");

  std::string measured_path, algo = "ring", model_out = "model.json";
  int64_t n_params = 25600000;
  int bytes_per_param = 4, cal_local_batch = 64;
  double io_fraction = 0.5;
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "fit a cost model to measured rows");
  calibrate_cmd->add_option("measured", measured_path, "CSV of measured per-iteration times")->required();
  calibrate_cmd->add_option("--algo", algo, "collective formula to fit (ring|tree|linear)");
  calibrate_cmd->add_option("--n-params", n_params, "model parameter count");
  calibrate_cmd->add_option("--bytes-per-param", bytes_per_param, "wire bytes per parameter");
  calibrate_cmd->add_option("--local-batch", cal_local_batch, "samples per worker per iteration");
  calibrate_cmd->add_option("--io-fraction", io_fraction, "share of the compute residual booked as io");
  calibrate_cmd->add_option("--out", model_out, "fitted cost model JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(config_path, out, rank, rank_out);
    if (verify->parsed()) return cmd_verify(verify_config);
    if (simulate->parsed()) return cmd_simulate(model_path, workers, group_size, sim_local_batch, sweep_out);
    if (calibrate_cmd->parsed())
      return cmd_calibrate(measured_path, algo, n_params, bytes_per_param, cal_local_batch,
                           io_fraction, model_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
