// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "lsgd/dataset.hpp"
#include "lsgd/sampler.hpp"
#include "test_util.hpp"

using namespace lsgd;
using namespace lsgd_test;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/lsgd_test_") + std::to_string(::getpid()) + "_" + name;
}

// Independent multinomial logistic regression on raw features, used to show
// the synthetic blobs are actually separable. No shared code with the MLP.
double logistic_fit_loss(const Dataset& d, int iterations, double lr) {
  int C = d.n_classes, F = d.n_features;
  std::vector<double> W(static_cast<size_t>(C * F), 0.0), b(static_cast<size_t>(C), 0.0);
  std::vector<double> logits(static_cast<size_t>(C)), p(static_cast<size_t>(C));
  std::vector<double> gW(W.size()), gb(b.size());
  double loss = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::fill(gW.begin(), gW.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    loss = 0.0;
    for (int64_t i = 0; i < d.n_samples; ++i) {
      const double* x = d.row(i);
      double zmax = -1e300;
      for (int c = 0; c < C; ++c) {
        double z = b[static_cast<size_t>(c)];
        for (int f = 0; f < F; ++f) z += W[static_cast<size_t>(c * F + f)] * x[f];
        logits[static_cast<size_t>(c)] = z;
        zmax = std::max(zmax, z);
      }
      double denom = 0.0;
      for (int c = 0; c < C; ++c) denom += std::exp(logits[static_cast<size_t>(c)] - zmax);
      for (int c = 0; c < C; ++c) p[static_cast<size_t>(c)] = std::exp(logits[static_cast<size_t>(c)] - zmax) / denom;
      loss += -std::log(p[static_cast<size_t>(d.label(i))]);
      for (int c = 0; c < C; ++c) {
        double delta = p[static_cast<size_t>(c)] - (c == d.label(i) ? 1.0 : 0.0);
        for (int f = 0; f < F; ++f) gW[static_cast<size_t>(c * F + f)] += delta * x[f];
        gb[static_cast<size_t>(c)] += delta;
      }
    }
    double inv = 1.0 / static_cast<double>(d.n_samples);
    for (size_t k = 0; k < W.size(); ++k) W[k] -= lr * gW[k] * inv;
    for (size_t k = 0; k < b.size(); ++k) b[k] -= lr * gb[k] * inv;
  }
  return loss / static_cast<double>(d.n_samples);
}

}  // namespace

TEST_CASE("synthetic blobs: balance, determinism, validation") {
  Dataset d = generate_synthetic(1, 100, 5, 2, 3.0);
  CHECK(d.n_samples == 100);
  std::map<int, int> counts;
  for (int32_t y : d.labels) counts[y]++;
  CHECK(counts[0] == 50);
  CHECK(counts[1] == 50);

  Dataset d2 = generate_synthetic(1, 100, 5, 2, 3.0);
  CHECK(bitwise_equal(d.features, d2.features));
  CHECK(d.labels == d2.labels);

  Dataset d3 = generate_synthetic(2, 100, 5, 2, 3.0);
  CHECK(!bitwise_equal(d.features, d3.features));

  CHECK_THROWS_AS(generate_synthetic(1, 1, 5, 2, 3.0), ConfigError);   // fewer samples than classes
  CHECK_THROWS_AS(generate_synthetic(1, 10, 0, 2, 3.0), ConfigError);  // no features
  CHECK_THROWS_AS(generate_synthetic(1, 10, 5, 1, 3.0), ConfigError);  // one class
  CHECK_THROWS_AS(generate_synthetic(1, 10, 5, 2, 0.0), ConfigError);  // zero spread
}

TEST_CASE("synthetic blobs are separable by an independent logistic fit") {
  Dataset d = generate_synthetic(123, 1000, 5, 2, 10.0);
  double trained = logistic_fit_loss(d, 400, 0.5);
  CHECK(trained < 0.1);
}

TEST_CASE("csv parse, error reporting and bitwise round trip") {
  std::string path = temp_path("ok.csv");
  {
    std::ofstream out(path);
    out << "1.0,2.0,0\n3.0,4.0,1\n";
  }
  Dataset d = load_csv(path);
  CHECK(d.n_samples == 2);
  CHECK(d.n_features == 2);
  CHECK(d.n_classes == 2);
  CHECK(d.row(1)[0] == 3.0);
  CHECK(d.label(1) == 1);

  std::string gap = temp_path("gap.csv");
  {
    std::ofstream out(gap);
    out << "1.0,0\n2.0,2\n";  // class count inferred as max label + 1
  }
  CHECK(load_csv(gap).n_classes == 3);
  std::remove(gap.c_str());

  std::string bad = temp_path("bad.csv");
  {
    std::ofstream out(bad);
    out << "1.0,abc,0\n";
  }
  bool threw = false;
  try {
    load_csv(bad);
  } catch (const ConfigError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK(threw);

  std::string empty = temp_path("empty.csv");
  { std::ofstream out(empty); }
  CHECK_THROWS_AS(load_csv(empty), ConfigError);

  Dataset blobs = generate_synthetic(9, 60, 4, 3, 2.0);
  std::string rt = temp_path("rt.csv");
  save_csv(blobs, rt);
  Dataset back = load_csv(rt);
  CHECK(back.n_samples == blobs.n_samples);
  CHECK(back.n_classes == blobs.n_classes);
  CHECK(bitwise_equal(back.features, blobs.features));
  CHECK(back.labels == blobs.labels);

  std::remove(path.c_str());
  std::remove(bad.c_str());
  std::remove(empty.c_str());
  std::remove(rt.c_str());
}

TEST_CASE("minibatch sampler reproduces the seeded Fisher-Yates oracle") {
  // Independent oracle run: SplitMix64(42) driving a modulo Fisher-Yates over
  // [0..7] gives the permutation [3,1,6,2,4,0,7,5].
  MinibatchSampler sampler(8, Rng(42));
  Minibatch first = sampler.draw(4);
  CHECK(first.indices == std::vector<int32_t>{3, 1, 6, 2});
  Minibatch second = sampler.draw(4);
  CHECK(second.indices == std::vector<int32_t>{4, 0, 7, 5});

  std::set<int32_t> seen(first.indices.begin(), first.indices.end());
  for (int32_t i : second.indices) CHECK(seen.count(i) == 0);  // disjoint within an epoch
}

TEST_CASE("drawing the whole dataset yields a permutation") {
  MinibatchSampler sampler(16, Rng(5));
  Minibatch m = sampler.draw(16);
  std::set<int32_t> unique(m.indices.begin(), m.indices.end());
  CHECK(unique.size() == 16);
  CHECK(*unique.begin() == 0);
  CHECK(*unique.rbegin() == 15);
}

TEST_CASE("epoch coverage: every index exactly once per epoch") {
  MinibatchSampler sampler(12, Rng(8));
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::multiset<int32_t> all;
    for (int draw = 0; draw < 3; ++draw) {
      Minibatch m = sampler.draw(4);
      all.insert(m.indices.begin(), m.indices.end());
    }
    CHECK(all.size() == 12);
    for (int32_t i = 0; i < 12; ++i) CHECK(all.count(i) == 1);
  }
}

TEST_CASE("sampler refreshes with drop-last semantics and rejects oversized draws") {
  MinibatchSampler sampler(10, Rng(3));
  sampler.draw(4);
  sampler.draw(4);
  CHECK(sampler.epochs_started() == 1);
  sampler.draw(4);  // 2 indices left; tail dropped, new epoch
  CHECK(sampler.epochs_started() == 2);

  CHECK_THROWS_AS(sampler.draw(11), Error);
}

TEST_CASE("with-replacement sampling stays in range and is deterministic") {
  MinibatchSampler a(10, Rng(4), true), b(10, Rng(4), true);
  for (int draw = 0; draw < 20; ++draw) {
    Minibatch ma = a.draw(8), mb = b.draw(8);
    CHECK(ma.indices == mb.indices);
    for (int32_t i : ma.indices) {
      CHECK(i >= 0);
      CHECK(i < 10);
    }
  }
}

TEST_CASE("partition: contiguous equal shards") {
  Minibatch m;
  m.indices = {0, 1, 2, 3, 4, 5, 6, 7};
  auto shards = partition_minibatch(m, 4);
  REQUIRE(shards.size() == 4);
  CHECK(shards[0].indices == std::vector<int32_t>{0, 1});
  CHECK(shards[1].indices == std::vector<int32_t>{2, 3});
  CHECK(shards[2].indices == std::vector<int32_t>{4, 5});
  CHECK(shards[3].indices == std::vector<int32_t>{6, 7});
  CHECK(shards[2].owner == 2);

  auto one = partition_minibatch(m, 1);
  CHECK(one.size() == 1);
  CHECK(one[0].indices == m.indices);

  Minibatch six;
  six.indices = {0, 1, 2, 3, 4, 5};
  CHECK_THROWS_AS(partition_minibatch(six, 4), Error);
}

TEST_CASE("partition property holds for drawn minibatches") {
  Rng meta(555);
  for (int trial = 0; trial < 10; ++trial) {
    int64_t n = 24 + static_cast<int64_t>(meta.next_below(100));
    MinibatchSampler sampler(n, Rng(meta.next_u64()));
    Minibatch m = sampler.draw(24);
    auto shards = partition_minibatch(m, 6);
    std::multiset<int32_t> unioned;
    std::set<int32_t> distinct;
    for (const Shard& s : shards) {
      CHECK(s.indices.size() == 4);
      unioned.insert(s.indices.begin(), s.indices.end());
      distinct.insert(s.indices.begin(), s.indices.end());
    }
    CHECK(unioned.size() == m.indices.size());
    CHECK(distinct.size() == m.indices.size());  // pairwise disjoint
    std::multiset<int32_t> original(m.indices.begin(), m.indices.end());
    CHECK(unioned == original);
  }
}
