// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lsgd/executors.hpp"
#include "lsgd/simulator.hpp"

namespace lsgd {

struct VerifyRunSpec {
  Algorithm algorithm = Algorithm::sequential;
  int n_workers = 1;
  int n_groups = 1;
};

struct VerifySpec {
  double tolerance = 1e-8;
  std::vector<VerifyRunSpec> runs;  // when empty, cmd_verify builds the default trio
};

// Parsed run configuration file. Unknown keys anywhere in the document are
// rejected; validation errors name the offending key path.
struct RunConfig {
  TrainConfig train;
  std::string transport_backend = "inprocess";  // inprocess | tcp
  std::vector<std::string> endpoints;           // tcp only, host:port per rank
  VerifySpec verify;
  uint64_t run_id = 0;  // config-content hash mixed with the seed
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

CostModel load_cost_model(const std::string& path);
void save_cost_model(const CostModel& model, const std::string& path);

std::string run_id_hex(uint64_t run_id);

}  // namespace lsgd
