// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lsgd/config.hpp"
#include "lsgd/metrics.hpp"

using namespace lsgd;

namespace {

std::string tmp_file(const std::string& name) {
  return "/tmp/lsgd_cli_" + std::to_string(::getpid()) + "_" + name;
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
  std::string cmd = std::string(LSGD_CLI_PATH) + " " + args + " > " + stdout_path + " 2> " + stderr_path;
  int status = std::system(cmd.c_str());
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) fields.push_back(tok);
  return fields;
}

const char* kTrainConfig = R"({
  "algorithm": "sequential",
  "local_batch": 32,
  "iterations": 10,
  "seed": 11,
  "model": {"layer_sizes": [16, 8, 4]},
  "data": {"n_samples": 512, "n_features": 16, "n_classes": 4, "spread": 6.0},
  "optim": {"mode": "plain"}
})";

}  // namespace

TEST_CASE("train writes one metrics row per iteration with the exact header") {
  std::string cfg = tmp_file("train.json");
  std::string csv = tmp_file("train.csv");
  write_file(cfg, kTrainConfig);
  std::string out = tmp_file("train.out");
  CHECK(run_cli("train " + cfg + " --out " + csv, out) == 0);

  std::string text = slurp(out);
  CHECK(text.find("final loss") != std::string::npos);
  CHECK(text.find("mean throughput") != std::string::npos);

  auto lines = lines_of(slurp(csv));
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == kMetricsHeader);
  CHECK(split_csv(lines[1]).size() == 16);
}

TEST_CASE("missing model.layer_sizes exits 2 and names the key") {
  std::string cfg = tmp_file("bad.json");
  write_file(cfg, R"({"algorithm": "sequential", "model": {}})");
  std::string err = tmp_file("bad.err");
  CHECK(run_cli("train " + cfg, "/dev/null", err) == 2);
  std::string text = slurp(err);
  CHECK(text.find("error:") == 0);
  CHECK(text.find("model.layer_sizes") != std::string::npos);
}

TEST_CASE("identical configs produce identical loss and lr columns") {
  std::string cfg = tmp_file("det.json");
  write_file(cfg, kTrainConfig);
  std::string csv1 = tmp_file("det1.csv"), csv2 = tmp_file("det2.csv");
  CHECK(run_cli("train " + cfg + " --out " + csv1) == 0);
  CHECK(run_cli("train " + cfg + " --out " + csv2) == 0);
  auto l1 = lines_of(slurp(csv1)), l2 = lines_of(slurp(csv2));
  REQUIRE(l1.size() == l2.size());
  for (size_t i = 1; i < l1.size(); ++i) {
    auto f1 = split_csv(l1[i]), f2 = split_csv(l2[i]);
    CHECK(f1[0] == f2[0]);  // run_id from config hash and seed
    CHECK(f1[6] == f2[6]);  // lr
    CHECK(f1[7] == f2[7]);  // loss
  }
}

TEST_CASE("verify: default trio passes at 1e-8") {
  std::string cfg = tmp_file("verify.json");
  write_file(cfg, R"({
    "algorithm": "csgd",
    "n_workers": 4,
    "n_groups": 2,
    "local_batch": 16,
    "iterations": 50,
    "seed": 42,
    "model": {"layer_sizes": [16, 8, 4]},
    "data": {"n_samples": 512, "n_features": 16, "n_classes": 4},
    "optim": {"mode": "plain"}
  })");
  std::string out = tmp_file("verify.out");
  CHECK(run_cli("verify " + cfg, out) == 0);
  CHECK(slurp(out).find("PASS") != std::string::npos);
}

TEST_CASE("verify: zero tolerance exposes summation-order differences") {
  std::string cfg = tmp_file("verify0.json");
  write_file(cfg, R"({
    "algorithm": "csgd",
    "n_workers": 2,
    "local_batch": 16,
    "iterations": 20,
    "seed": 42,
    "model": {"layer_sizes": [16, 8, 4]},
    "data": {"n_samples": 512, "n_features": 16, "n_classes": 4},
    "optim": {"mode": "plain"},
    "verify": {"tolerance": 0.0, "runs": [
      {"algorithm": "sequential", "n_workers": 1},
      {"algorithm": "csgd", "n_workers": 2}
    ]}
  })");
  std::string out = tmp_file("verify0.out");
  CHECK(run_cli("verify " + cfg, out) == 1);
  CHECK(slurp(out).find("FAIL") != std::string::npos);
}

TEST_CASE("verify: single-worker worlds agree exactly") {
  std::string cfg = tmp_file("verify1.json");
  write_file(cfg, R"({
    "algorithm": "csgd",
    "n_workers": 1,
    "local_batch": 32,
    "iterations": 20,
    "seed": 9,
    "model": {"layer_sizes": [16, 8, 4]},
    "data": {"n_samples": 512, "n_features": 16, "n_classes": 4},
    "optim": {"mode": "plain"},
    "verify": {"tolerance": 0.0, "runs": [
      {"algorithm": "sequential", "n_workers": 1},
      {"algorithm": "csgd", "n_workers": 1},
      {"algorithm": "lsgd", "n_workers": 1, "n_groups": 1}
    ]}
  })");
  std::string out = tmp_file("verify1.out");
  CHECK(run_cli("verify " + cfg, out) == 0);
  std::string text = slurp(out);
  CHECK(text.find("PASS") != std::string::npos);
}

TEST_CASE("simulate: efficiency trend, zero-comm limit, calibrate round trip") {
  std::string sweep_csv = tmp_file("sweep.csv");
  CHECK(run_cli(std::string("simulate ") + LSGD_SOURCE_DIR +
                "/configs/cost_model_cluster.json --workers 4,8,16,32,64,128,256 --group-size 4 --out " +
                sweep_csv) == 0);
  auto lines = lines_of(slurp(sweep_csv));
  REQUIRE(lines.size() > 1);
  CHECK(lines[0] == kSweepHeader);
  double prev_eff = 1e9;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv(lines[i]);
    if (f[1] != "csgd") continue;
    int n = std::atoi(f[0].c_str());
    double eff = std::strtod(f[5].c_str(), nullptr);
    if (n >= 8) {
      CHECK(eff < prev_eff);
    }
    prev_eff = eff;
  }

  // Zero-communication model: every efficiency row is 100.
  std::string zero_model = tmp_file("zero_model.json");
  write_file(zero_model, R"({"t_sample": 0.01, "t_io": 0.0, "alpha": 0.0, "beta": 0.0,
                             "n_params": 1000, "alpha_local": 0.0, "beta_local": 0.0})");
  std::string zero_csv = tmp_file("zero.csv");
  CHECK(run_cli("simulate " + zero_model + " --workers 4,8,64 --out " + zero_csv) == 0);
  auto zero_lines = lines_of(slurp(zero_csv));
  for (size_t i = 1; i < zero_lines.size(); ++i) {
    CHECK(std::strtod(split_csv(zero_lines[i])[5].c_str(), nullptr) == doctest::Approx(100.0));
  }

  // The sweep output feeds calibrate directly.
  std::string fitted = tmp_file("fitted.json");
  CHECK(run_cli("calibrate " + sweep_csv + " --algo ring --n-params 25600000 --out " + fitted) == 0);
  CostModel model = load_cost_model(fitted);
  CHECK(std::abs(model.alpha - 0.004) / 0.004 <= 0.01);
  CHECK(std::abs(model.beta - 6.4e-10) / 6.4e-10 <= 0.01);
}

TEST_CASE("calibrate: rank-deficient input exits 2") {
  std::string csv = tmp_file("flat.csv");
  write_file(csv, "n_workers,train_time_s,allreduce_time_s\n8,1.0,0.1\n8,1.1,0.12\n");
  std::string err = tmp_file("flat.err");
  CHECK(run_cli("calibrate " + csv + " --out " + tmp_file("flat.json"), "/dev/null", err) == 2);
  CHECK(slurp(err).find("error:") == 0);
}

TEST_CASE("tcp backend: spawned world trains and merges metrics") {
  int port_base = 42000 + static_cast<int>(::getpid() % 9000);
  std::ostringstream cfg_text;
  cfg_text << R"({
    "algorithm": "lsgd",
    "n_workers": 2,
    "n_groups": 1,
    "local_batch": 8,
    "iterations": 5,
    "seed": 3,
    "model": {"layer_sizes": [8, 4, 2]},
    "data": {"n_samples": 128, "n_features": 8, "n_classes": 2},
    "optim": {"mode": "plain"},
    "transport": {"backend": "tcp", "timeout_s": 15.0, "endpoints": [)";
  for (int r = 0; r < 3; ++r) {
    cfg_text << (r ? ", " : "") << "\"127.0.0.1:" << (port_base + r) << "\"";
  }
  cfg_text << "]}\n}";
  std::string cfg = tmp_file("tcp.json");
  write_file(cfg, cfg_text.str());
  std::string csv = tmp_file("tcp.csv");
  CHECK(run_cli("train " + cfg + " --out " + csv) == 0);
  auto lines = lines_of(slurp(csv));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == kMetricsHeader);
}

TEST_CASE("train consumes a csv dataset") {
  std::string data_csv = tmp_file("data.csv");
  {
    std::ofstream out(data_csv);
    for (int i = 0; i < 64; ++i) {
      out << (i % 2 ? 1.5 : -1.5) << "," << 0.25 * (i % 7) << "," << (i % 2) << "\n";
    }
  }
  std::string cfg = tmp_file("csv_train.json");
  write_file(cfg, R"({
    "algorithm": "csgd",
    "n_workers": 2,
    "local_batch": 8,
    "iterations": 4,
    "model": {"layer_sizes": [2, 2]},
    "data": {"source": "csv", "path": ")" + data_csv + R"("},
    "optim": {"mode": "plain"}
  })");
  std::string csv = tmp_file("csv_train_out.csv");
  CHECK(run_cli("train " + cfg + " --out " + csv) == 0);
  CHECK(lines_of(slurp(csv)).size() == 5);

  // Wrong input width against the model is a configuration failure.
  std::string bad_cfg = tmp_file("csv_bad.json");
  write_file(bad_cfg, R"({
    "algorithm": "sequential",
    "local_batch": 8,
    "iterations": 2,
    "model": {"layer_sizes": [3, 2]},
    "data": {"source": "csv", "path": ")" + data_csv + R"("},
    "optim": {"mode": "plain"}
  })");
  CHECK(run_cli("train " + bad_cfg) == 2);
}

TEST_CASE("unknown flags and subcommands exit 2") {
  CHECK(run_cli("trainn /tmp/nope.json") == 2);
  CHECK(run_cli("train") == 2);
}
