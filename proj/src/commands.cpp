#include "wgplvm/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wgplvm/checkpoint.hpp"
#include "wgplvm/config.hpp"
#include "wgplvm/data_io.hpp"
#include "wgplvm/errors.hpp"
#include "wgplvm/experiments.hpp"
#include "wgplvm/synthetic.hpp"

namespace wgplvm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<int> repetitions;
  std::string checkpoint;
  std::string data;
  std::optional<int> num_samples;
  std::optional<int> bins;
  std::optional<std::string> label;
  std::string kind;
  std::vector<std::string> params;
};

RunConfig effective_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.model) cfg.model = model_kind_from_string(*o.model);
  if (o.repetitions) {
    if (*o.repetitions < 1) throw ConfigError("--repetitions must be >= 1");
    cfg.repetitions = *o.repetitions;
  }
  if (o.num_samples) {
    if (*o.num_samples < 1) throw ConfigError("--num-samples must be >= 1");
    cfg.num_samples = *o.num_samples;
  }
  if (o.bins) {
    if (*o.bins < 1) throw ConfigError("--bins must be >= 1");
    cfg.bins = *o.bins;
  }
  return cfg;
}

fs::path prepare_output(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_json(const fs::path& path, const json& j) { open_output(path) << j.dump(2) << '\n'; }

json aggregate_json(const Aggregate& a) { return {{"mean", a.mean}, {"std_error", a.std_error}}; }

// Test points for checkpoint-based evaluation: --data read with the loader
// matching the model's data manifold, otherwise the stored held-out points.
std::vector<Point> checkpoint_test_points(const Checkpoint& c, const std::string& data_path) {
  if (data_path.empty()) {
    if (c.heldout.empty()) throw DataError("checkpoint has no held-out points; pass --data");
    return c.heldout;
  }
  const Manifold& m = c.state.data_manifold;
  Dataset d;
  switch (m.kind()) {
    case ManifoldKind::Sphere:
      if (m.parameter() != 2) throw DataError("no loader for " + m.name());
      d = load_directions(data_path);
      break;
    case ManifoldKind::Kendall2D:
      d = load_landmarks(data_path, 0);
      break;
    case ManifoldKind::SpdLogEuclidean:
      d = load_spd(data_path, m.parameter());
      break;
    case ManifoldKind::Euclidean:
      d = load_vectors(data_path);
      break;
    default:
      throw DataError("no loader for " + m.name());
  }
  if (!(d.manifold == m)) throw DataError("test data are on " + d.manifold.name() + ", model expects " + m.name());
  return d.points;
}

ExperimentReport run_evaluation(const Options& o, const RunConfig& cfg, bool with_uq) {
  if (o.checkpoint.empty()) {
    if (o.config.empty()) throw ConfigError("pass --config or --checkpoint");
    return run_experiment(cfg, load_dataset(cfg.dataset), with_uq);
  }
  const Checkpoint c = load_checkpoint(o.checkpoint);
  return evaluate_checkpoint(cfg, c.state, checkpoint_test_points(c, o.data), with_uq);
}

json timings_json(const ExperimentReport& r) {
  json reps = json::array();
  for (const Repetition& rep : r.repetitions) {
    reps.push_back({{"repetition", rep.index}, {"fit_seconds", rep.fit_seconds}, {"eval_seconds", rep.eval_seconds}});
  }
  return {{"repetitions", reps}};
}

int cmd_fit(const Options& o, std::ostream& log) {
  if (o.config.empty()) throw ConfigError("fit needs --config");
  const RunConfig cfg = effective_config(o);
  const Dataset data = load_dataset(cfg.dataset);
  log << "fitting " << to_string(cfg.model) << " on " << data.size() << " points of " << data.manifold.name() << '\n';
  const Checkpoint c = fit_checkpoint(cfg, data);

  const fs::path dir = prepare_output(cfg.output_dir);
  save_checkpoint(dir / "checkpoint.json", c);
  {
    auto trace = open_output(dir / "fit_trace.csv");
    trace << "# iteration,objective\n";
    for (const TraceEntry& e : c.state.fit_trace) trace << e.iteration << ',' << e.objective << '\n';
  }
  open_output(dir / "config.json") << config_to_json(cfg) << '\n';
  const auto& trace = c.state.fit_trace;
  const double best = std::max_element(trace.begin(), trace.end(), [](const auto& a, const auto& b) {
                        return a.objective < b.objective;
                      })->objective;
  write_json(dir / "fit_summary.json",
             {{"model", to_string(c.state.kind)},
              {"manifold", c.state.data_manifold.name()},
              {"num_train", c.state.num_points()},
              {"num_heldout", c.heldout.size()},
              {"iterations", trace.back().iteration},
              {"initial_objective", trace.front().objective},
              {"best_objective", best},
              {"signal_var", c.state.kernel.signal_var()},
              {"lengthscale_sq", c.state.kernel.lengthscale_sq()},
              {"noise_var", c.state.kernel.noise_var()}});
  log << "objective " << trace.front().objective << " -> " << best << "; wrote " << (dir / "checkpoint.json").string()
      << '\n';
  return kExitOk;
}

int cmd_encode(const Options& o, std::ostream& log) {
  const RunConfig cfg = effective_config(o);
  const ExperimentReport r = run_evaluation(o, cfg, false);
  const fs::path dir = prepare_output(cfg.output_dir);
  {
    auto csv = open_output(dir / "encode_report.csv");
    csv << "# repetition,split_seed,num_train,num_test,excluded,rmse_intrinsic,rmse_euclidean,violation_rate\n";
    for (const Repetition& rep : r.repetitions) {
      const EncodingEvaluation& e = rep.encoding;
      csv << rep.index << ',' << rep.split_seed << ',' << rep.num_train << ',' << e.num_test << ',' << e.excluded << ','
          << e.rmse_intrinsic << ',' << e.rmse_euclidean << ',' << e.violation_rate << '\n';
    }
  }
  write_json(dir / "encode_summary.json",
             {{"model", to_string(r.model)},
              {"repetitions", r.repetitions.size()},
              {"rmse_intrinsic", aggregate_json(r.rmse_intrinsic)},
              {"rmse_euclidean", aggregate_json(r.rmse_euclidean)},
              {"excluded_cut_locus", r.excluded},
              {"violation_rate", r.violation_rate}});
  write_json(dir / "timings.json", timings_json(r));
  log << to_string(r.model) << ": intrinsic RMSE " << r.rmse_intrinsic.mean << " +- " << r.rmse_intrinsic.std_error
      << ", Euclidean RMSE " << r.rmse_euclidean.mean << " +- " << r.rmse_euclidean.std_error << " over "
      << r.repetitions.size() << " repetition(s)\n";
  return kExitOk;
}

int cmd_uq(const Options& o, std::ostream& log) {
  const RunConfig cfg = effective_config(o);
  const ExperimentReport r = run_evaluation(o, cfg, true);
  const fs::path dir = prepare_output(cfg.output_dir);
  {
    auto csv = open_output(dir / "uq_calibration.csv");
    csv << "# bin_lower,bin_upper,density_intrinsic,cumulative_intrinsic,density_euclidean,cumulative_euclidean\n";
    for (int b = 0; b < cfg.bins; ++b) {
      const auto i = static_cast<std::size_t>(b);
      csv << static_cast<double>(b) / cfg.bins << ',' << static_cast<double>(b + 1) / cfg.bins << ','
          << r.pooled_intrinsic.density[i] << ',' << r.pooled_intrinsic.cumulative[i] << ','
          << r.pooled_euclidean.density[i] << ',' << r.pooled_euclidean.cumulative[i] << '\n';
    }
  }
  {
    auto csv = open_output(dir / "uq_fractions.csv");
    csv << "# repetition,index,fraction_intrinsic,fraction_euclidean\n";
    for (const Repetition& rep : r.repetitions) {
      for (std::size_t k = 0; k < rep.uq.intrinsic.fractions.size(); ++k) {
        csv << rep.index << ',' << k << ',' << rep.uq.intrinsic.fractions[k] << ','
            << rep.uq.euclidean.fractions[k] << '\n';
      }
    }
  }
  json per_rep = json::array();
  for (const Repetition& rep : r.repetitions) {
    per_rep.push_back({{"repetition", rep.index},
                       {"sup_distance_intrinsic", rep.uq.intrinsic.sup_distance},
                       {"sup_distance_euclidean", rep.uq.euclidean.sup_distance}});
  }
  write_json(dir / "uq_summary.json",
             {{"model", to_string(r.model)},
              {"num_samples", cfg.num_samples},
              {"bins", cfg.bins},
              {"sup_distance_intrinsic", aggregate_json(r.sup_distance_intrinsic)},
              {"sup_distance_euclidean", aggregate_json(r.sup_distance_euclidean)},
              {"pooled_sup_distance_intrinsic", r.pooled_intrinsic.sup_distance},
              {"pooled_sup_distance_euclidean", r.pooled_euclidean.sup_distance},
              {"excluded_cut_locus", r.excluded},
              {"per_repetition", per_rep}});
  write_json(dir / "timings.json", timings_json(r));
  log << to_string(r.model) << ": calibration sup-distance " << r.sup_distance_intrinsic.mean << " (intrinsic), "
      << r.sup_distance_euclidean.mean << " (Euclidean)\n";
  return kExitOk;
}

int cmd_latent(const Options& o, std::ostream& log) {
  if (o.checkpoint.empty()) throw ConfigError("latent needs --checkpoint");
  const RunConfig cfg = effective_config(o);
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const ModelState& s = c.state;

  const std::string key = o.label.value_or(s.labels.empty() ? "none" : s.label_name);
  std::vector<std::string> column;
  if (key == "fa") {
    if (!(s.data_manifold == Manifold::spd(3))) throw ConfigError("label 'fa' needs SPD(3) data");
    for (const Point& p : s.data) {
      std::ostringstream v;
      v << std::setprecision(17) << fractional_anisotropy(p);
      column.push_back(v.str());
    }
  } else if (key == "index") {
    for (int i = 0; i < s.num_points(); ++i) column.push_back(std::to_string(i));
  } else if (key != "none") {
    if (s.labels.empty() || (key != s.label_name && key != "label")) {
      throw ConfigError("unknown label key '" + key + "' (available: none, index" +
                        (s.labels.empty() ? "" : ", label, " + s.label_name) +
                        (s.data_manifold == Manifold::spd(3) ? ", fa" : "") + ")");
    }
    column = s.labels;
  }

  const fs::path dir = prepare_output(cfg.output_dir);
  auto csv = open_output(dir / "latent.csv");
  csv << '#';
  for (int a = 0; a < s.latent_dim(); ++a) csv << (a > 0 ? "," : " ") << 'x' << (a + 1);
  if (!column.empty()) csv << ',' << key;
  csv << '\n';
  for (int i = 0; i < s.num_points(); ++i) {
    for (int a = 0; a < s.latent_dim(); ++a) csv << (a > 0 ? "," : "") << s.latents(i, a);
    if (!column.empty()) csv << ',' << column[static_cast<std::size_t>(i)];
    csv << '\n';
  }
  log << "wrote " << s.num_points() << " latent rows to " << (dir / "latent.csv").string() << '\n';
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& log) {
  SyntheticParams params;
  for (const std::string& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::logic_error&) {
      throw ConfigError("--param value is not a number: '" + kv + "'");
    }
    params[kv.substr(0, eq)] = value;
  }
  const SyntheticData data = synthesize(o.kind, params, o.seed.value_or(0));
  const fs::path dir = prepare_output(o.out.value_or("."));
  const fs::path file = dir / (o.kind + ".csv");
  open_output(file) << data.csv;
  log << "wrote " << file.string() << '\n';
  return kExitOk;
}

void error_record(std::ostream& err, int code, const std::string& type, const std::string& message, int line = 0) {
  json record = {{"exit_code", code}, {"type", type}, {"message", message}};
  if (line > 0) record["line"] = line;
  err << json{{"error", record}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wrapped Gaussian process latent variable models on Riemannian manifolds", "wgplvm"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--seed", o.seed, "Base seed (overrides the config)");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
  };
  auto model_options = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "Model: wgplvm, gplvm or gplvm_proj")
        ->check(CLI::IsMember({"wgplvm", "gplvm", "gplvm_proj"}));
  };
  auto eval_options = [&](CLI::App* sub) {
    sub->add_option("--repetitions", o.repetitions, "Train/test resamples (config mode)");
    sub->add_option("--checkpoint", o.checkpoint, "Evaluate a fitted checkpoint instead of refitting");
    sub->add_option("--data", o.data, "Test data CSV for --checkpoint (default: held-out points)");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit a model and write a checkpoint and objective trace");
  common(fit);
  model_options(fit);

  CLI::App* encode = app.add_subcommand("encode", "Reconstruction RMSE of encoded test points");
  common(encode);
  model_options(encode);
  eval_options(encode);

  CLI::App* uq = app.add_subcommand("uq", "Calibration of predictive samples");
  common(uq);
  model_options(uq);
  eval_options(uq);
  uq->add_option("--num-samples", o.num_samples, "Predictive samples per test point");
  uq->add_option("--bins", o.bins, "Histogram bins");

  CLI::App* latent = app.add_subcommand("latent", "Export training latents with a label column");
  common(latent);
  latent->add_option("--checkpoint", o.checkpoint, "Fitted checkpoint")->required();
  latent->add_option("--label", o.label, "Label column: none, index, label, the stored label name, or fa");

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset in loader format");
  synth->add_option("--kind", o.kind, "sphere_circle, spd_geodesic or kendall_family")
      ->required()
      ->check(CLI::IsMember(synthetic_kinds()));
  synth->add_option("--param", o.params, "Generator parameter as key=value (repeatable)");
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--out", o.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_record(err, kExitConfig, "usage", e.what());
    return kExitConfig;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out);
    if (encode->parsed()) return cmd_encode(o, out);
    if (uq->parsed()) return cmd_uq(o, out);
    if (latent->parsed()) return cmd_latent(o, out);
    return cmd_synth(o, out);
  } catch (const ConfigError& e) {
    error_record(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    error_record(err, kExitData, "data", e.what(), e.line());
    return kExitData;
  } catch (const InvalidPointError& e) {
    error_record(err, kExitData, "data", e.what());
    return kExitData;
  } catch (const DimensionError& e) {
    error_record(err, kExitData, "data", e.what());
    return kExitData;
  } catch (const Error& e) {
    // NumericalError, ConvergenceError, CutLocusError
    error_record(err, kExitNumerical, "numerical", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    error_record(err, kExitInternal, "internal", e.what());
    return kExitInternal;
  }
}

}  // namespace wgplvm
