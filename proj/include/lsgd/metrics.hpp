// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lsgd/executors.hpp"
#include "lsgd/simulator.hpp"

namespace lsgd {

inline constexpr const char* kMetricsHeader =
    "run_id,algorithm,n_workers,n_groups,iteration,epoch,lr,loss,"
    "t_io_s,t_compute_s,t_local_reduce_s,t_global_allreduce_s,t_broadcast_s,t_update_s,"
    "iter_time_s,throughput_sps";

inline constexpr const char* kSweepHeader =
    "n_workers,algorithm,iter_time_s,allreduce_time_s,throughput_sps,efficiency_percent";

// One metrics row per iteration, columns exactly as in kMetricsHeader.
void write_metrics_csv(const std::string& path, const std::string& run_id, const TrainConfig& cfg,
                       int64_t dataset_size, const TrainResult& result);

// Per-rank view of the same schema, for ranks joined over TCP.
void write_rank_metrics_csv(const std::string& path, const std::string& run_id,
                            const TrainConfig& cfg, int64_t dataset_size, const RankResult& rank);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// Generic CSV-with-header reader used to ingest measured rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

// Accepts either a metrics CSV (n_workers, iter_time_s, t_global_allreduce_s)
// or a sweep CSV (n_workers, iter_time_s, allreduce_time_s). When an
// `algorithm` column is present only csgd rows are kept, since the fit
// targets the flat allreduce formula.
std::vector<MeasuredRow> read_measured_rows(const std::string& path);

}  // namespace lsgd
