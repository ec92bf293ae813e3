// SPDX-License-Identifier: Apache-2.0
#include "lsgd/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lsgd/rng.hpp"

namespace lsgd {

namespace {

// Fills `out` with iid standard normals, consuming Box-Muller pairs. The last
// draw of an odd-length fill discards its sibling so the draw count per call
// depends only on the length.
void fill_gaussian(Rng& rng, double* out, int n) {
  int i = 0;
  for (; i + 1 < n; i += 2) {
    rng.next_gaussian_pair(out[i], out[i + 1]);
  }
  if (i < n) {
    double z0, z1;
    rng.next_gaussian_pair(z0, z1);
    out[i] = z0;
  }
}

}  // namespace

Dataset generate_synthetic(uint64_t seed, int64_t n_samples, int n_features,
                           int n_classes, double spread) {
  check<ConfigError>(n_classes >= 2, "generate_synthetic: n_classes must be >= 2, got ", n_classes);
  check<ConfigError>(n_samples >= n_classes, "generate_synthetic: n_samples (", n_samples,
                     ") must be >= n_classes (", n_classes, ")");
  check<ConfigError>(n_features >= 1, "generate_synthetic: n_features must be >= 1");
  check<ConfigError>(spread > 0.0, "generate_synthetic: spread must be > 0");

  Rng rng(seed);

  // Class centers: unit-sphere directions scaled by spread.
  std::vector<double> centers(static_cast<size_t>(n_classes) * n_features);
  for (int c = 0; c < n_classes; ++c) {
    double* center = centers.data() + static_cast<size_t>(c) * n_features;
    fill_gaussian(rng, center, n_features);
    double norm2 = 0.0;
    for (int j = 0; j < n_features; ++j) norm2 += center[j] * center[j];
    double r = std::sqrt(norm2);
    if (r == 0.0) r = 1.0;
    for (int j = 0; j < n_features; ++j) center[j] = spread * center[j] / r;
  }

  Dataset data;
  data.n_samples = n_samples;
  data.n_features = n_features;
  data.n_classes = n_classes;
  data.features.resize(static_cast<size_t>(n_samples) * n_features);
  data.labels.resize(static_cast<size_t>(n_samples));

  for (int64_t i = 0; i < n_samples; ++i) {
    int32_t label = static_cast<int32_t>(i % n_classes);
    data.labels[static_cast<size_t>(i)] = label;
    double* x = data.features.data() + static_cast<size_t>(i) * n_features;
    fill_gaussian(rng, x, n_features);
    const double* center = centers.data() + static_cast<size_t>(label) * n_features;
    for (int j = 0; j < n_features; ++j) x[j] += center[j];
  }
  return data;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  check<ConfigError>(in.good(), "load_csv: cannot open ", path);

  Dataset data;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    size_t pos = 0;
    while (pos <= line.size()) {
      size_t comma = line.find(',', pos);
      std::string tok = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const char* begin = tok.c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      check<ConfigError>(end != begin && *end == '\0' && !tok.empty(),
                         "load_csv: ", path, ": malformed field '", tok, "' at line ", line_no);
      fields.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    check<ConfigError>(fields.size() >= 2, "load_csv: ", path, ": need at least one feature and a label at line ",
                       line_no);
    int d = static_cast<int>(fields.size()) - 1;
    if (data.n_samples == 0) {
      data.n_features = d;
    } else {
      check<ConfigError>(d == data.n_features, "load_csv: ", path, ": expected ", data.n_features,
                         " features but found ", d, " at line ", line_no);
    }
    double label_field = fields.back();
    int32_t label = static_cast<int32_t>(label_field);
    check<ConfigError>(static_cast<double>(label) == label_field && label >= 0,
                       "load_csv: ", path, ": label must be a nonnegative integer at line ", line_no);
    data.features.insert(data.features.end(), fields.begin(), fields.end() - 1);
    data.labels.push_back(label);
    ++data.n_samples;
    if (label + 1 > data.n_classes) data.n_classes = label + 1;
  }
  check<ConfigError>(data.n_samples > 0, "load_csv: ", path, ": file is empty");
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  check<Error>(out.good(), "save_csv: cannot open ", path, " for writing");
  char buf[40];
  for (int64_t i = 0; i < data.n_samples; ++i) {
    const double* x = data.row(i);
    for (int j = 0; j < data.n_features; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
      out << buf << ',';
    }
    out << data.label(i) << '\n';
  }
  check<Error>(out.good(), "save_csv: write to ", path, " failed");
}

}  // namespace lsgd
