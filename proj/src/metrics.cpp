// SPDX-License-Identifier: Apache-2.0
#include "lsgd/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lsgd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const std::string& run_id, const TrainConfig& cfg,
               int64_t dataset_size, int64_t t, double lr, double loss,
               const std::array<PhaseSpan, kNumPhases>& phase, double iter_wall,
               double throughput) {
  out << run_id << ',' << algorithm_name(cfg.algorithm) << ',' << cfg.topology.n_workers << ','
      << cfg.topology.n_groups << ',' << t << ',' << fmt(cfg.epoch_float(t, dataset_size)) << ','
      << fmt(lr) << ',' << fmt(loss);
  for (int p = 0; p < kNumPhases; ++p) out << ',' << fmt(phase[static_cast<size_t>(p)].duration());
  out << ',' << fmt(iter_wall) << ',' << fmt(throughput) << '\n';
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::string& run_id, const TrainConfig& cfg,
                       int64_t dataset_size, const TrainResult& result) {
  std::ofstream out(path);
  check<Error>(out.good(), "cannot open ", path, " for writing");
  out << kMetricsHeader << '\n';
  for (size_t t = 0; t < result.rows.size(); ++t) {
    const IterationRow& row = result.rows[t];
    double throughput = row.iter_wall_s > 0.0 ? cfg.global_batch() / row.iter_wall_s : 0.0;
    write_row(out, run_id, cfg, dataset_size, static_cast<int64_t>(t), row.lr, row.loss, row.phase,
              row.iter_wall_s, throughput);
  }
  check<Error>(out.good(), "write to ", path, " failed");
}

void write_rank_metrics_csv(const std::string& path, const std::string& run_id,
                            const TrainConfig& cfg, int64_t dataset_size, const RankResult& rank) {
  std::ofstream out(path);
  check<Error>(out.good(), "cannot open ", path, " for writing");
  out << kMetricsHeader << '\n';
  for (size_t t = 0; t < rank.iterations.size(); ++t) {
    const RankIteration& it = rank.iterations[t];
    double lr = t < rank.lr.size() ? rank.lr[t] : 0.0;
    double loss = t < rank.loss.size() ? rank.loss[t] : 0.0;
    double wall = it.block_end - it.block_begin;
    double throughput = wall > 0.0 ? cfg.global_batch() / wall : 0.0;
    write_row(out, run_id, cfg, dataset_size, static_cast<int64_t>(t), lr, loss, it.phase, wall,
              throughput);
  }
  check<Error>(out.good(), "write to ", path, " failed");
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  check<Error>(out.good(), "cannot open ", path, " for writing");
  out << kSweepHeader << '\n';
  for (const SweepRow& row : rows) {
    out << row.n_workers << ',' << row.algorithm << ',' << fmt(row.iter_time_s) << ','
        << fmt(row.allreduce_time_s) << ',' << fmt(row.throughput_sps) << ','
        << fmt(row.efficiency_percent) << '\n';
  }
  check<Error>(out.good(), "write to ", path, " failed");
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  check<ConfigError>(in.good(), "cannot open ", path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  check<ConfigError>(!table.header.empty(), path, ": missing CSV header");
  return table;
}

std::vector<MeasuredRow> read_measured_rows(const std::string& path) {
  CsvTable table = read_csv(path);
  int c_workers = table.column("n_workers");
  check<ConfigError>(c_workers >= 0, path, ": no n_workers column");
  int c_time = table.column("iter_time_s");
  if (c_time < 0) c_time = table.column("train_time_s");
  check<ConfigError>(c_time >= 0, path, ": no iter_time_s or train_time_s column");
  int c_ar = table.column("allreduce_time_s");
  if (c_ar < 0) c_ar = table.column("t_global_allreduce_s");
  check<ConfigError>(c_ar >= 0, path, ": no allreduce_time_s or t_global_allreduce_s column");
  int c_algo = table.column("algorithm");

  std::vector<MeasuredRow> rows;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& fields = table.rows[i];
    check<ConfigError>(fields.size() == table.header.size(), path, ": row ", i + 2,
                       " has ", fields.size(), " fields, expected ", table.header.size());
    if (c_algo >= 0 && fields[static_cast<size_t>(c_algo)] != "csgd") continue;
    MeasuredRow row;
    row.n_workers = std::atoi(fields[static_cast<size_t>(c_workers)].c_str());
    row.train_time_s = std::strtod(fields[static_cast<size_t>(c_time)].c_str(), nullptr);
    row.allreduce_time_s = std::strtod(fields[static_cast<size_t>(c_ar)].c_str(), nullptr);
    rows.push_back(row);
  }
  check<ConfigError>(!rows.empty(), path, ": no usable rows (csgd rows required)");
  return rows;
}

}  // namespace lsgd
