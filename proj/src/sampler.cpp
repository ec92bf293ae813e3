// SPDX-License-Identifier: Apache-2.0
#include "lsgd/sampler.hpp"

#include <numeric>
#include <utility>

namespace lsgd {

MinibatchSampler::MinibatchSampler(int64_t dataset_size, Rng rng, bool with_replacement)
    : n_(dataset_size), rng_(rng), with_replacement_(with_replacement) {
  check(n_ >= 1, "MinibatchSampler: dataset size must be >= 1, got ", n_);
  if (!with_replacement_) refresh();
}

void MinibatchSampler::refresh() {
  perm_.resize(static_cast<size_t>(n_));
  std::iota(perm_.begin(), perm_.end(), 0);
  for (int64_t i = n_ - 1; i >= 1; --i) {
    uint64_t j = rng_.next_below(static_cast<uint64_t>(i) + 1);
    std::swap(perm_[static_cast<size_t>(i)], perm_[static_cast<size_t>(j)]);
  }
  cursor_ = 0;
  ++epochs_started_;
}

Minibatch MinibatchSampler::draw(int64_t size) {
  check(size >= 1, "draw_minibatch: size must be >= 1");
  check(size <= n_, "draw_minibatch: size ", size, " exceeds dataset size ", n_);
  Minibatch m;
  m.indices.resize(static_cast<size_t>(size));
  if (with_replacement_) {
    for (int64_t i = 0; i < size; ++i) {
      m.indices[static_cast<size_t>(i)] = static_cast<int32_t>(rng_.next_below(static_cast<uint64_t>(n_)));
    }
    return m;
  }
  if (cursor_ + size > n_) refresh();
  for (int64_t i = 0; i < size; ++i) {
    m.indices[static_cast<size_t>(i)] = perm_[static_cast<size_t>(cursor_ + i)];
  }
  cursor_ += size;
  return m;
}

std::vector<Shard> partition_minibatch(const Minibatch& m, int n_workers) {
  check(n_workers >= 1, "partition_minibatch: n_workers must be >= 1");
  check(m.size() % n_workers == 0, "partition_minibatch: minibatch size ", m.size(),
        " is not divisible by ", n_workers, " workers");
  int64_t per = m.size() / n_workers;
  std::vector<Shard> shards(static_cast<size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) {
    auto begin = m.indices.begin() + static_cast<int64_t>(i) * per;
    shards[static_cast<size_t>(i)].indices.assign(begin, begin + per);
    shards[static_cast<size_t>(i)].owner = i;
  }
  return shards;
}

}  // namespace lsgd
