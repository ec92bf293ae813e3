// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "lsgd/rng.hpp"
#include "lsgd/simulator.hpp"

using namespace lsgd;

namespace {

CostModel random_model(Rng& rng) {
  CostModel m;
  m.t_sample = rng.next_double() * 0.1;
  m.t_io = rng.next_double() * 1.0;
  m.alpha = rng.next_double() * 0.01;
  m.beta = rng.next_double() * 1e-8;
  m.alpha_local = rng.next_double() * 0.001;
  m.beta_local = rng.next_double() * 1e-9;
  m.bytes_per_param = 4;
  m.n_params = 1 + static_cast<int64_t>(rng.next_below(50'000'000));
  int algos = static_cast<int>(rng.next_below(3));
  m.allreduce_algo = algos == 0 ? CollectiveAlgo::ring
                                : (algos == 1 ? CollectiveAlgo::tree : CollectiveAlgo::linear);
  return m;
}

}  // namespace

TEST_CASE("a party of one communicates for free") {
  CostModel m;
  m.alpha = 1.0;
  m.beta = 1.0;
  for (CollectiveAlgo algo : {CollectiveAlgo::ring, CollectiveAlgo::tree, CollectiveAlgo::linear}) {
    CHECK(collective_time(m, 1, 1e9, algo) == 0.0);
  }
}

TEST_CASE("ring formula at a fixed point") {
  CostModel m;
  m.alpha = 0.0;
  m.beta = 1e-9;
  CHECK(collective_time(m, 4, 1e6, CollectiveAlgo::ring) == doctest::Approx(1.5e-3).epsilon(1e-12));
}

TEST_CASE("ring bandwidth term flattens out in p") {
  CostModel m;
  m.alpha = 0.0;
  m.beta = 1e-9;
  double limit = 2.0 * 1e6 * m.beta;
  double at2 = collective_time(m, 2, 1e6, CollectiveAlgo::ring);
  double at1024 = collective_time(m, 1024, 1e6, CollectiveAlgo::ring);
  CHECK(at2 == doctest::Approx(0.5 * limit));
  CHECK(at1024 < limit);
  CHECK(at1024 > 0.99 * limit);
}

TEST_CASE("tree and linear formulas at fixed points") {
  CostModel m;
  m.alpha = 2e-3;
  m.beta = 1e-9;
  CHECK(collective_time(m, 8, 1e6, CollectiveAlgo::tree) ==
        doctest::Approx(2.0 * 3.0 * (2e-3 + 1e-3)).epsilon(1e-12));
  CHECK(collective_time(m, 8, 1e6, CollectiveAlgo::linear) ==
        doctest::Approx(7.0 * (2e-3 + 1e-3)).epsilon(1e-12));
}

TEST_CASE("csgd iteration with one worker is io plus compute") {
  CostModel m;
  m.t_io = 0.25;
  m.t_sample = 0.01;
  m.alpha = 1.0;  // must not matter at p = 1
  m.beta = 1.0;
  m.n_params = 1000;
  CHECK(iter_time_csgd(m, 1, 64) == doctest::Approx(0.25 + 0.64).epsilon(1e-12));
}

TEST_CASE("allreduce share of the csgd iteration grows with workers") {
  for (CollectiveAlgo algo : {CollectiveAlgo::tree, CollectiveAlgo::linear}) {
    CostModel m;
    m.t_io = 0.1;
    m.t_sample = 0.001;
    m.alpha = 1e-4;
    m.beta = 1e-10;
    m.n_params = 25'600'000;
    m.allreduce_algo = algo;
    double prev_share = -1.0;
    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
      double iter = iter_time_csgd(m, n, 64);
      double share = collective_time(m, n, m.payload_bytes()) / iter;
      CHECK(share >= prev_share);
      prev_share = share;
    }
  }
}

TEST_CASE("lsgd: saturated io makes the iteration independent of the global term") {
  CostModel a;
  a.t_io = 2.0;
  a.t_sample = 0.01;
  a.alpha = 1e-5;
  a.beta = 1e-10;
  a.n_params = 1'000'000;
  a.alpha_local = 1e-6;
  a.beta_local = 1e-11;
  CostModel b = a;
  b.alpha = 3e-5;  // bigger global latency, still below t_io

  int n = 32, groups = 8;
  double global_a = collective_time(a, groups, a.payload_bytes());
  double global_b = collective_time(b, groups, b.payload_bytes());
  REQUIRE(global_a < a.t_io);
  REQUIRE(global_b < b.t_io);
  CHECK(iter_time_lsgd(a, n, groups, 64) == iter_time_lsgd(b, n, groups, 64));

  int per_group = n / groups + 1;
  double local = 2.0 * (per_group - 1) * (a.alpha_local + a.payload_bytes() * a.beta_local);
  CHECK(iter_time_lsgd(a, n, groups, 64) ==
        doctest::Approx(a.t_io + 64 * a.t_sample + local).epsilon(1e-12));
}

TEST_CASE("single-group lsgd with shared link constants is no faster than csgd") {
  for (CollectiveAlgo algo : {CollectiveAlgo::ring, CollectiveAlgo::tree, CollectiveAlgo::linear}) {
    CostModel m;
    m.t_io = 0.0;
    m.t_sample = 0.005;
    m.alpha = 1e-4;
    m.beta = 5e-10;
    m.alpha_local = m.alpha;
    m.beta_local = m.beta;
    m.n_params = 10'000'000;
    m.allreduce_algo = algo;
    for (int n : {2, 4, 8, 16}) {
      CHECK(iter_time_lsgd(m, n, 1, 64) >= iter_time_csgd(m, n, 64));
    }
  }
}

TEST_CASE("lsgd never costs more than csgd plus its local phases") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    CostModel m = random_model(rng);
    if (m.t_io == 0.0) m.t_io = 0.1;
    int group_size = 4;
    for (int n : {4, 8, 16, 64, 256}) {
      int groups = n / group_size;
      double local = 2.0 * group_size * (m.alpha_local + m.payload_bytes() * m.beta_local);
      CHECK(iter_time_lsgd(m, n, groups, 64) <= iter_time_csgd(m, n, 64) + local + 1e-12);
      double global = collective_time(m, groups, m.payload_bytes());
      if (global <= m.t_io) {
        double no_comm = m.t_io + 64 * m.t_sample + local;
        CHECK(iter_time_lsgd(m, n, groups, 64) == doctest::Approx(no_comm).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("iteration cost is monotone in the model constants") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    CostModel m = random_model(rng);
    CostModel worse = m;
    worse.alpha = m.alpha * 2 + 1e-6;
    worse.beta = m.beta * 2 + 1e-12;
    worse.n_params = m.n_params * 2;
    for (int n : {1, 2, 8, 32, 128}) {
      CHECK(iter_time_csgd(worse, n, 64) >= iter_time_csgd(m, n, 64));
    }
    if (m.allreduce_algo != CollectiveAlgo::ring) {
      for (int step = 1; step < 5; ++step) {
        CHECK(iter_time_csgd(m, 1 << step, 64) >= iter_time_csgd(m, 1 << (step - 1), 64));
      }
    }
  }
}

TEST_CASE("doubling bytes_per_param doubles the bandwidth term exactly") {
  CostModel m;
  m.alpha = 0.0;
  m.beta = 3e-10;
  m.n_params = 12'345'678;
  m.bytes_per_param = 4;
  CostModel twice = m;
  twice.bytes_per_param = 8;
  for (CollectiveAlgo algo : {CollectiveAlgo::ring, CollectiveAlgo::tree, CollectiveAlgo::linear}) {
    for (int p : {2, 7, 64}) {
      CHECK(collective_time(twice, p, twice.payload_bytes(), algo) ==
            2.0 * collective_time(m, p, m.payload_bytes(), algo));
    }
  }
}

TEST_CASE("sweep normalization and the perfect-scaling limit") {
  CostModel zero_comm;
  zero_comm.t_sample = 0.01;
  zero_comm.t_io = 0.0;
  zero_comm.n_params = 1000;
  std::vector<SweepRow> rows = sweep(zero_comm, {4, 8, 16, 32}, 4, 64);
  for (const SweepRow& row : rows) {
    CHECK(row.efficiency_percent == doctest::Approx(100.0).epsilon(1e-9));
  }

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    CostModel m = random_model(rng);
    if (m.t_sample == 0.0) m.t_sample = 0.001;
    std::vector<SweepRow> swept = sweep(m, {4, 8, 64, 256}, 4, 64);
    for (const SweepRow& row : swept) {
      CHECK(row.efficiency_percent <= 100.5);
      CHECK(row.throughput_sps > 0.0);
      if (row.n_workers == 4) CHECK(row.efficiency_percent == doctest::Approx(100.0));
    }
  }
}

TEST_CASE("calibrate recovers a known ring model to within 1%") {
  CostModel truth;
  truth.alpha = 4e-3;
  truth.beta = 6.4e-10;
  truth.t_io = 0.3;
  truth.t_sample = 0.05;
  truth.n_params = 25'600'000;
  truth.bytes_per_param = 4;
  truth.allreduce_algo = CollectiveAlgo::ring;

  std::vector<MeasuredRow> rows;
  for (int n : {4, 8, 32, 128, 256}) {
    MeasuredRow row;
    row.n_workers = n;
    row.allreduce_time_s = collective_time(truth, n, truth.payload_bytes());
    row.train_time_s = iter_time_csgd(truth, n, 64);
    rows.push_back(row);
  }

  CalibrateOptions opts;
  opts.algo = CollectiveAlgo::ring;
  opts.n_params = truth.n_params;
  opts.bytes_per_param = truth.bytes_per_param;
  opts.local_batch = 64;
  opts.io_fraction = truth.t_io / (truth.t_io + 64 * truth.t_sample);

  CalibrationResult fit = calibrate(rows, opts);
  CHECK(std::abs(fit.model.alpha - truth.alpha) / truth.alpha <= 0.01);
  CHECK(std::abs(fit.model.beta - truth.beta) / truth.beta <= 0.01);
  CHECK(std::abs(fit.model.t_io - truth.t_io) / truth.t_io <= 0.01);
  CHECK(std::abs(fit.model.t_sample - truth.t_sample) / truth.t_sample <= 0.01);
  CHECK(fit.max_abs_residual_s <= 1e-9);

  // The fitted model's allreduce share must grow with workers when alpha > 0.
  double prev = -1.0;
  for (int n : {4, 16, 64, 256}) {
    double share = collective_time(fit.model, n, fit.model.payload_bytes()) /
                   iter_time_csgd(fit.model, n, 64);
    CHECK(share > prev);
    prev = share;
  }
}

TEST_CASE("calibrate rejects rank-deficient input") {
  std::vector<MeasuredRow> same_n = {{8, 1.0, 0.1}, {8, 1.1, 0.12}, {8, 0.9, 0.11}};
  CalibrateOptions opts;
  opts.n_params = 1'000'000;
  CHECK_THROWS_AS(calibrate(same_n, opts), ConfigError);
  std::vector<MeasuredRow> single = {{8, 1.0, 0.1}};
  CHECK_THROWS_AS(calibrate(single, opts), ConfigError);
}

TEST_CASE("lsgd rejects group counts that do not divide the workers") {
  CostModel m;
  m.n_params = 1000;
  CHECK_THROWS_AS(iter_time_lsgd(m, 6, 4, 64), Error);
}
