// SPDX-License-Identifier: Apache-2.0
#include "lsgd/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace lsgd {

namespace {

using nlohmann::json;

// Strict view over one JSON object: typed getters that name the full key path
// on error, plus unknown-key rejection.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    check<ConfigError>(j_.is_object(), path_.empty() ? "config root" : path_, " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& require(const std::string& key) {
    seen_.insert(key);
    check<ConfigError>(j_.contains(key), "missing required key ", key_path(key));
    return j_.at(key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return as<T>(j_.at(key), key_path(key));
  }

  template <typename T>
  T get_required(const std::string& key) {
    return as<T>(require(key), key_path(key));
  }

  ObjectReader child(const std::string& key) {
    seen_.insert(key);
    check<ConfigError>(j_.contains(key), "missing required key ", key_path(key));
    return ObjectReader(j_.at(key), key_path(key));
  }

  void reject_unknown() const {
    for (const auto& item : j_.items()) {
      check<ConfigError>(seen_.count(item.key()) != 0, "unknown key ", key_path(item.key()));
    }
  }

  const json& raw() const { return j_; }

 private:
  template <typename T>
  static T as(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, std::string>) {
      check<ConfigError>(v.is_string(), path, " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      check<ConfigError>(v.is_boolean(), path, " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      check<ConfigError>(v.is_number_integer() || v.is_number_unsigned(), path, " must be an integer");
      return v.get<T>();
    } else {
      check<ConfigError>(v.is_number(), path, " must be a number");
      return v.get<T>();
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<int> parse_layer_sizes(const json& v, const std::string& path) {
  check<ConfigError>(v.is_array() && !v.empty(), path, " must be a nonempty array of integers");
  std::vector<int> sizes;
  for (const auto& e : v) {
    check<ConfigError>(e.is_number_integer(), path, " must contain only integers");
    sizes.push_back(e.get<int>());
  }
  return sizes;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(str_cat("config is not valid JSON: ", e.what()));
  }

  RunConfig out;
  TrainConfig& t = out.train;
  ObjectReader root(doc, "");

  t.algorithm = algorithm_from_name(root.get_required<std::string>("algorithm"));
  t.topology.n_workers = root.get_or<int>("n_workers", 1);
  t.topology.n_groups = root.get_or<int>("n_groups", 1);
  t.local_batch = root.get_or<int>("local_batch", 64);
  t.epochs = root.get_or<int>("epochs", 1);
  t.iterations = root.get_or<int64_t>("iterations", 0);
  t.seed = root.get_or<uint64_t>("seed", 42);

  {
    ObjectReader model = root.child("model");
    t.model.layer_sizes = parse_layer_sizes(model.require("layer_sizes"), model.key_path("layer_sizes"));
    std::string act = model.get_or<std::string>("activation", "relu");
    check<ConfigError>(act == "relu", model.key_path("activation"), ": only 'relu' is supported");
    model.reject_unknown();
  }

  if (root.has("data")) {
    ObjectReader data = root.child("data");
    {
      std::string source = data.get_or<std::string>("source", "synthetic");
      if (source == "synthetic") {
        t.data.source = DataSpec::Source::synthetic;
      } else if (source == "csv") {
        t.data.source = DataSpec::Source::csv;
      } else {
        throw ConfigError(str_cat(data.key_path("source"), ": expected synthetic|csv, got '", source, "'"));
      }
    }
    t.data.n_samples = data.get_or<int64_t>("n_samples", t.data.n_samples);
    t.data.n_features = data.get_or<int>("n_features", t.data.n_features);
    t.data.n_classes = data.get_or<int>("n_classes", t.data.n_classes);
    t.data.spread = data.get_or<double>("spread", t.data.spread);
    t.data.path = data.get_or<std::string>("path", "");
    data.reject_unknown();
  }

  if (root.has("optim")) {
    ObjectReader optim = root.child("optim");
    {
      std::string mode = optim.get_or<std::string>("mode", "momentum");
      if (mode == "plain") {
        t.optim.mode = UpdateMode::plain;
      } else if (mode == "momentum") {
        t.optim.mode = UpdateMode::momentum;
      } else {
        throw ConfigError(str_cat(optim.key_path("mode"), ": expected plain|momentum, got '", mode, "'"));
      }
    }
    t.optim.base_lr = optim.get_or<double>("base_lr", t.optim.base_lr);
    t.optim.momentum = optim.get_or<double>("momentum", t.optim.momentum);
    t.optim.weight_decay = optim.get_or<double>("weight_decay", t.optim.weight_decay);
    t.optim.warmup_epochs = optim.get_or<double>("warmup_epochs", t.optim.warmup_epochs);
    t.optim.decay_every_epochs = optim.get_or<int>("decay_every_epochs", t.optim.decay_every_epochs);
    t.optim.decay_factor = optim.get_or<double>("decay_factor", t.optim.decay_factor);
    optim.reject_unknown();
  }

  if (root.has("transport")) {
    ObjectReader transport = root.child("transport");
    out.transport_backend = transport.get_or<std::string>("backend", "inprocess");
    check<ConfigError>(out.transport_backend == "inprocess" || out.transport_backend == "tcp",
                       transport.key_path("backend"), ": expected inprocess|tcp");
    if (transport.has("endpoints")) {
      const json& eps = transport.require("endpoints");
      check<ConfigError>(eps.is_array(), transport.key_path("endpoints"), " must be an array");
      for (const auto& e : eps) {
        check<ConfigError>(e.is_string(), transport.key_path("endpoints"),
                           " must contain host:port strings");
        out.endpoints.push_back(e.get<std::string>());
      }
    }
    t.collective_timeout_s = transport.get_or<double>("timeout_s", t.collective_timeout_s);
    transport.reject_unknown();
  }

  if (root.has("delays")) {
    ObjectReader delays = root.child("delays");
    t.delays.io_delay_s = delays.get_or<double>("io_delay_ms", 0.0) / 1000.0;
    t.delays.global_link_delay_s = delays.get_or<double>("global_link_delay_ms", 0.0) / 1000.0;
    delays.reject_unknown();
  }

  if (root.has("verify")) {
    ObjectReader verify = root.child("verify");
    out.verify.tolerance = verify.get_or<double>("tolerance", 1e-8);
    if (verify.has("runs")) {
      const json& runs = verify.require("runs");
      check<ConfigError>(runs.is_array(), verify.key_path("runs"), " must be an array");
      int i = 0;
      for (const auto& r : runs) {
        ObjectReader run(r, str_cat("verify.runs[", i, "]"));
        VerifyRunSpec spec;
        spec.algorithm = algorithm_from_name(run.get_required<std::string>("algorithm"));
        spec.n_workers = run.get_or<int>("n_workers", 1);
        spec.n_groups = run.get_or<int>("n_groups", 1);
        run.reject_unknown();
        out.verify.runs.push_back(spec);
        ++i;
      }
    }
    verify.reject_unknown();
  }

  root.reject_unknown();

  out.run_id = fnv1a64(doc.dump()) ^ t.seed;
  return out;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  check<ConfigError>(in.good(), "cannot open config file ", path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

CostModel load_cost_model(const std::string& path) {
  std::ifstream in(path);
  check<ConfigError>(in.good(), "cannot open cost model file ", path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(str_cat("cost model is not valid JSON: ", e.what()));
  }
  ObjectReader root(doc, "");
  CostModel m;
  m.t_sample = root.get_or<double>("t_sample", 0.0);
  m.t_io = root.get_or<double>("t_io", 0.0);
  m.alpha = root.get_or<double>("alpha", 0.0);
  m.beta = root.get_or<double>("beta", 0.0);
  m.bytes_per_param = root.get_or<int>("bytes_per_param", 4);
  m.n_params = root.get_required<int64_t>("n_params");
  m.allreduce_algo = collective_algo_from_name(root.get_or<std::string>("allreduce_algo", "ring"));
  m.alpha_local = root.get_or<double>("alpha_local", 0.0);
  m.beta_local = root.get_or<double>("beta_local", 0.0);
  root.reject_unknown();
  m.validate();
  return m;
}

void save_cost_model(const CostModel& model, const std::string& path) {
  json doc;
  doc["t_sample"] = model.t_sample;
  doc["t_io"] = model.t_io;
  doc["alpha"] = model.alpha;
  doc["beta"] = model.beta;
  doc["bytes_per_param"] = model.bytes_per_param;
  doc["n_params"] = model.n_params;
  doc["allreduce_algo"] = collective_algo_name(model.allreduce_algo);
  doc["alpha_local"] = model.alpha_local;
  doc["beta_local"] = model.beta_local;
  std::ofstream out(path);
  check<Error>(out.good(), "cannot open ", path, " for writing");
  out << doc.dump(2) << "\n";
}

std::string run_id_hex(uint64_t run_id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(run_id));
  return std::string(buf);
}

}  // namespace lsgd
