// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsgd/common.hpp"

namespace lsgd {

// Dense classification dataset. Features are row-major |X| x d.
struct Dataset {
  int64_t n_samples = 0;
  int n_features = 0;
  int n_classes = 0;
  std::vector<double> features;
  std::vector<int32_t> labels;

  const double* row(int64_t i) const { return features.data() + i * n_features; }
  int32_t label(int64_t i) const { return labels[static_cast<size_t>(i)]; }
};

// A batch is an ordered view of dataset rows. Order defines the summation
// order of every batch reduction, so it is part of the contract.
struct BatchView {
  const Dataset* data = nullptr;
  std::span<const int32_t> indices;

  int64_t size() const { return static_cast<int64_t>(indices.size()); }
  const double* sample(int64_t i) const { return data->row(indices[static_cast<size_t>(i)]); }
  int32_t label(int64_t i) const { return data->label(indices[static_cast<size_t>(i)]); }
};

// Gaussian-blob classification data. Class centers are drawn on the unit
// sphere scaled by `spread`, points are center + unit-variance noise, labels
// are assigned round-robin so class counts are balanced to within one.
// Fully determined by the arguments.
Dataset generate_synthetic(uint64_t seed, int64_t n_samples, int n_features,
                           int n_classes, double spread);

// CSV rows are `f_1,...,f_d,label`. The class count is inferred as
// max label + 1. Malformed rows are reported with their 1-based line number.
Dataset load_csv(const std::string& path);

// Writes features with enough digits that load_csv round-trips bitwise.
void save_csv(const Dataset& data, const std::string& path);

}  // namespace lsgd
