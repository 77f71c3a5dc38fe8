#include "wgplvm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wgplvm/errors.hpp"

namespace wgplvm {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

double read_positive(const json& j, const char* key, double fallback) {
  double v = fallback;
  read(j, key, v);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

void parse_dataset(const json& j, DatasetSpec& d) {
  reject_unknown(j,
                 {"loader", "path", "manifold", "reference_index", "n", "window", "stride", "log_returns", "kind",
                  "params", "seed"},
                 "dataset");
  read(j, "loader", d.loader);
  read(j, "path", d.path);
  read(j, "manifold", d.manifold);
  read(j, "reference_index", d.reference_index);
  read(j, "n", d.n);
  read(j, "window", d.window);
  read(j, "stride", d.stride);
  read(j, "log_returns", d.log_returns);
  read(j, "kind", d.synthetic_kind);
  read(j, "seed", d.synthetic_seed);
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) throw ConfigError("dataset.params must be an object");
    for (const auto& [key, value] : p.items()) {
      if (!value.is_number()) throw ConfigError("dataset.params." + key + " must be a number");
      d.synthetic_params[key] = value.get<double>();
    }
  }
  static const std::set<std::string> loaders{"directions", "landmarks", "spd", "prices", "vectors", "synthetic"};
  if (!loaders.contains(d.loader)) throw ConfigError("unknown dataset loader '" + d.loader + "'");
  if (d.loader == "synthetic") {
    synthetic_params(d.synthetic_kind, d.synthetic_params);
  } else if (d.path.empty()) {
    throw ConfigError("dataset.path is required for loader '" + d.loader + "'");
  }
  if (d.n < 1) throw ConfigError("dataset.n must be >= 1");
  if (d.window < 2 || d.stride < 1) throw ConfigError("dataset.window must be >= 2 and dataset.stride >= 1");
}

void parse_kernel(const json& j, KernelSpec& k) {
  reject_unknown(j, {"family", "signal_var", "lengthscale_sq", "noise_var"}, "kernel");
  std::string family = to_string(k.family);
  read(j, "family", family);
  k.family = kernel_family_from_string(family);
  k.log_signal_var = std::log(read_positive(j, "signal_var", k.signal_var()));
  k.log_lengthscale_sq = std::log(read_positive(j, "lengthscale_sq", k.lengthscale_sq()));
  k.log_noise_var = std::log(read_positive(j, "noise_var", k.noise_var()));
}

void parse_optimizer(const json& j, OptimizerConfig& o) {
  reject_unknown(j,
                 {"learning_rate", "max_iter", "grad_tol", "beta1", "beta2", "epsilon", "optimize_hyperparameters",
                  "min_noise_var"},
                 "optimizer");
  o.learning_rate = read_positive(j, "learning_rate", o.learning_rate);
  read(j, "max_iter", o.max_iter);
  if (o.max_iter < 0) throw ConfigError("optimizer.max_iter must be >= 0");
  read(j, "grad_tol", o.grad_tol);
  if (!(o.grad_tol >= 0.0)) throw ConfigError("optimizer.grad_tol must be >= 0");
  read(j, "beta1", o.beta1);
  read(j, "beta2", o.beta2);
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0 && o.beta2 >= 0.0 && o.beta2 < 1.0)) {
    throw ConfigError("optimizer.beta1 and beta2 must lie in [0, 1)");
  }
  o.epsilon = read_positive(j, "epsilon", o.epsilon);
  read(j, "optimize_hyperparameters", o.optimize_hyperparameters);
  o.min_log_noise_var = std::log(read_positive(j, "min_noise_var", std::exp(o.min_log_noise_var)));
}

json dataset_json(const DatasetSpec& d) {
  json params = json::object();
  for (const auto& [key, value] : d.synthetic_params) params[key] = value;
  return {{"loader", d.loader}, {"path", d.path},     {"manifold", d.manifold},
          {"reference_index", d.reference_index}, {"n", d.n}, {"window", d.window},
          {"stride", d.stride}, {"log_returns", d.log_returns}, {"kind", d.synthetic_kind},
          {"params", params},   {"seed", d.synthetic_seed}};
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"dataset", "model", "latent_dim", "kernel", "init", "init_path", "optimizer", "split", "seed",
                  "repetitions", "encode", "uq", "output_dir"},
                 "config");
  RunConfig c;
  if (j.contains("dataset")) parse_dataset(j.at("dataset"), c.dataset);
  if (j.contains("model")) {
    std::string model;
    read(j, "model", model);
    c.model = model_kind_from_string(model);
  }
  read(j, "latent_dim", c.latent_dim);
  if (c.latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (j.contains("kernel")) parse_kernel(j.at("kernel"), c.kernel);
  if (c.kernel.family == KernelFamily::Periodic && c.latent_dim != 1) {
    throw ConfigError("the periodic kernel needs latent_dim = 1");
  }
  read(j, "init", c.init);
  read(j, "init_path", c.init_path);
  resolve_init(c);
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), c.optimizer);
  if (j.contains("split")) {
    const json& s = j.at("split");
    reject_unknown(s, {"train_fraction"}, "split");
    read(s, "train_fraction", c.train_fraction);
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction <= 1.0)) throw ConfigError("split.train_fraction must lie in (0, 1]");
  read(j, "seed", c.seed);
  read(j, "repetitions", c.repetitions);
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (j.contains("encode")) {
    const json& e = j.at("encode");
    reject_unknown(e, {"restarts", "max_iter"}, "encode");
    read(e, "restarts", c.encode.restarts);
    read(e, "max_iter", c.encode.max_iter);
    if (c.encode.restarts < 0 || c.encode.max_iter < 0) throw ConfigError("encode settings must be >= 0");
  }
  if (j.contains("uq")) {
    const json& u = j.at("uq");
    reject_unknown(u, {"num_samples", "bins"}, "uq");
    read(u, "num_samples", c.num_samples);
    read(u, "bins", c.bins);
    if (c.num_samples < 1 || c.bins < 1) throw ConfigError("uq.num_samples and uq.bins must be >= 1");
  }
  read(j, "output_dir", c.output_dir);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const RunConfig& c) {
  const OptimizerConfig& o = c.optimizer;
  json j = {
      {"dataset", dataset_json(c.dataset)},
      {"model", to_string(c.model)},
      {"latent_dim", c.latent_dim},
      {"kernel",
       {{"family", to_string(c.kernel.family)},
        {"signal_var", c.kernel.signal_var()},
        {"lengthscale_sq", c.kernel.lengthscale_sq()},
        {"noise_var", c.kernel.noise_var()}}},
      {"init", c.init},
      {"init_path", c.init_path},
      {"optimizer",
       {{"learning_rate", o.learning_rate},
        {"max_iter", o.max_iter},
        {"grad_tol", o.grad_tol},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"epsilon", o.epsilon},
        {"optimize_hyperparameters", o.optimize_hyperparameters},
        {"min_noise_var", std::exp(o.min_log_noise_var)}}},
      {"split", {{"train_fraction", c.train_fraction}}},
      {"seed", c.seed},
      {"repetitions", c.repetitions},
      {"encode", {{"restarts", c.encode.restarts}, {"max_iter", c.encode.max_iter}}},
      {"uq", {{"num_samples", c.num_samples}, {"bins", c.bins}}},
      {"output_dir", c.output_dir},
  };
  return j.dump(2);
}

InitMethod resolve_init(const RunConfig& c) {
  if (c.init == "auto") return c.kernel.family == KernelFamily::Periodic ? InitMethod::PgaAngle : InitMethod::Pga;
  if (c.init == "pga" || c.init == "file") {
    if (c.init == "file" && c.init_path.empty()) throw ConfigError("init = file needs init_path");
    return InitMethod::Pga;
  }
  if (c.init == "pga_angle") {
    if (c.latent_dim != 1) throw ConfigError("init = pga_angle needs latent_dim = 1");
    return InitMethod::PgaAngle;
  }
  throw ConfigError("unknown init '" + c.init + "' (expected auto, pga, pga_angle or file)");
}

}  // namespace wgplvm
