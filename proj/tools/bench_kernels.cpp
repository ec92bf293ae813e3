// SPDX-License-Identifier: Apache-2.0
//
// Benchmark of the OpenMP batch kernels against the serial reference.
// Both paths must agree bitwise; the speedup column is the point of the
// parallel path on multi-core hosts.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lsgd/dataset.hpp"
#include "lsgd/mlp.hpp"

using namespace lsgd;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

bool bitwise_equal(const ParamVector& a, const ParamVector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("batch gradient: serial reference vs OpenMP (%d thread%s)\n", threads,
              threads == 1 ? "" : "s");
  std::printf("%-22s %8s %12s %12s %9s %8s\n", "model", "batch", "serial_s", "parallel_s", "speedup",
              "bitwise");

  struct Case {
    std::vector<int> layers;
    int64_t batch;
    int repeats;
  };
  const Case cases[] = {
      {{32, 16, 10}, 64, 50},
      {{32, 16, 10}, 512, 10},
      {{128, 64, 32, 10}, 256, 5},
      {{256, 128, 10}, 512, 3},
  };

  for (const Case& c : cases) {
    MlpModel model{c.layers};
    Dataset data = generate_synthetic(7, c.batch, c.layers.front(), c.layers.back(), 5.0);
    std::vector<int32_t> idx(static_cast<size_t>(c.batch));
    for (int64_t i = 0; i < c.batch; ++i) idx[static_cast<size_t>(i)] = static_cast<int32_t>(i);
    BatchView batch{&data, idx};
    ParamVector w = init_params(model, Rng(1), 0.1);

    BatchGrad serial = batch_gradient_serial(model, w, batch);
    BatchGrad parallel = batch_gradient(model, w, batch);
    bool same = bitwise_equal(serial.grad, parallel.grad) && serial.mean_loss == parallel.mean_loss;

    double ts = time_of([&] { batch_gradient_serial(model, w, batch); }, c.repeats);
    double tp = time_of([&] { batch_gradient(model, w, batch); }, c.repeats);

    std::string name;
    for (size_t i = 0; i < c.layers.size(); ++i) {
      name += (i ? "x" : "") + std::to_string(c.layers[i]);
    }
    std::printf("%-22s %8lld %12.6f %12.6f %8.2fx %8s\n", name.c_str(),
                static_cast<long long>(c.batch), ts, tp, ts / tp, same ? "yes" : "NO");
    if (!same) return 1;
  }
  return 0;
}
