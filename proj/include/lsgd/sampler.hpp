// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lsgd/common.hpp"
#include "lsgd/rng.hpp"

namespace lsgd {

struct Minibatch {
  std::vector<int32_t> indices;
  int64_t size() const { return static_cast<int64_t>(indices.size()); }
};

struct Shard {
  std::vector<int32_t> indices;
  int owner = 0;
};

// Epoch-wise sampling without replacement: a seeded Fisher-Yates permutation
// of the dataset, consumed in slices. When fewer than `size` indices remain
// in the epoch the tail is dropped and a fresh permutation starts (the usual
// drop-last loader behavior). With replacement mode draws indices i.i.d.
class MinibatchSampler {
 public:
  MinibatchSampler(int64_t dataset_size, Rng rng, bool with_replacement = false);

  Minibatch draw(int64_t size);

  // Completed permutation refreshes (the current epoch index).
  int64_t epochs_started() const { return epochs_started_; }

 private:
  void refresh();

  int64_t n_;
  Rng rng_;
  bool with_replacement_;
  std::vector<int32_t> perm_;
  int64_t cursor_ = 0;
  int64_t epochs_started_ = 0;
};

// Contiguous equal split: shard i gets positions [i*|M|/N, (i+1)*|M|/N).
// |M| must be divisible by n_workers; anything else signals a misconfigured
// global batch.
std::vector<Shard> partition_minibatch(const Minibatch& m, int n_workers);

}  // namespace lsgd
