#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wgplvm/kernels.hpp"
#include "wgplvm/model.hpp"
#include "wgplvm/synthetic.hpp"

namespace wgplvm {

struct DatasetSpec {
  // directions | landmarks | spd | prices | vectors | synthetic
  std::string loader = "synthetic";
  std::string path;
  // Optional expected manifold family ("sphere", "kendall2d", "spd", "euclidean").
  std::string manifold;
  int reference_index = 0;  // landmarks
  int n = 3;                // spd matrix size
  int window = 20;          // prices
  int stride = 7;           // prices
  bool log_returns = false; // prices
  std::string synthetic_kind = "sphere_circle";
  SyntheticParams synthetic_params;
  std::uint64_t synthetic_seed = 0;
};

// Every field has a default; a config file only lists what it changes.
//
// {
//   "dataset":   {"loader": "synthetic", "kind": "sphere_circle", "params": {}, "seed": 0,
//                 "path": "", "manifold": "", "reference_index": 0, "n": 3,
//                 "window": 20, "stride": 7, "log_returns": false},
//   "model":     "wgplvm",
//   "latent_dim": 2,
//   "kernel":    {"family": "rbf", "signal_var": 1.0, "lengthscale_sq": 1.0, "noise_var": 0.01},
//   "init":      "auto",              // auto | pga | pga_angle | file
//   "init_path": "",                  // N x q CSV over the full dataset when init = file
//   "optimizer": {"learning_rate": 0.01, "max_iter": 2000, "grad_tol": 1e-6, "beta1": 0.9,
//                 "beta2": 0.999, "epsilon": 1e-8, "optimize_hyperparameters": true,
//                 "min_noise_var": 1e-6},
//   "split":     {"train_fraction": 0.8},
//   "seed": 0, "repetitions": 10,
//   "encode":    {"restarts": 9, "max_iter": 500},
//   "uq":        {"num_samples": 50, "bins": 10},
//   "output_dir": "wgplvm_out"
// }
//
// "auto" picks pga_angle for the periodic kernel and pga otherwise.
struct RunConfig {
  DatasetSpec dataset;
  ModelKind model = ModelKind::Wgplvm;
  int latent_dim = 2;
  KernelSpec kernel;
  std::string init = "auto";
  std::string init_path;
  OptimizerConfig optimizer;
  // 1 is allowed for fit (no held-out data); encode and uq need < 1.
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  int repetitions = 10;
  EncodeOptions encode;
  int num_samples = 50;
  int bins = 10;
  std::string output_dir = "wgplvm_out";
};

// Throws ConfigError on syntax errors, unknown keys, wrong types and
// out-of-range values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

InitMethod resolve_init(const RunConfig& config);

}  // namespace wgplvm
