#include "wgplvm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "wgplvm/errors.hpp"
#include "wgplvm/synthetic.hpp"

namespace wgplvm {

namespace {

enum SeedStream : std::uint64_t { kSplitStream = 1, kEncodeStream = 2, kUqStream = 3 };

Point on_manifold(const Manifold& m, const Point& p) {
  return m.contains(p.coords, 1e-9) ? p : m.project(p.coords);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void finalize(ExperimentReport& report, int bins, bool with_uq) {
  std::vector<double> rmse_i, rmse_e, sup_i, sup_e, pooled_i, pooled_e;
  int violations = 0;
  int evaluated = 0;
  for (const Repetition& r : report.repetitions) {
    if (with_uq) {
      sup_i.push_back(r.uq.intrinsic.sup_distance);
      sup_e.push_back(r.uq.euclidean.sup_distance);
      pooled_i.insert(pooled_i.end(), r.uq.intrinsic.fractions.begin(), r.uq.intrinsic.fractions.end());
      pooled_e.insert(pooled_e.end(), r.uq.euclidean.fractions.begin(), r.uq.euclidean.fractions.end());
      report.excluded += r.uq.excluded;
    } else {
      rmse_i.push_back(r.encoding.rmse_intrinsic);
      rmse_e.push_back(r.encoding.rmse_euclidean);
      violations += r.encoding.violations;
      evaluated += r.encoding.num_test - r.encoding.excluded;
      report.excluded += r.encoding.excluded;
    }
  }
  if (with_uq) {
    report.sup_distance_intrinsic = aggregate(sup_i);
    report.sup_distance_euclidean = aggregate(sup_e);
    report.pooled_intrinsic = calibration_curve(std::move(pooled_i), bins);
    report.pooled_euclidean = calibration_curve(std::move(pooled_e), bins);
  } else {
    report.rmse_intrinsic = aggregate(rmse_i);
    report.rmse_euclidean = aggregate(rmse_e);
    report.violation_rate = evaluated > 0 ? static_cast<double>(violations) / evaluated : 0.0;
  }
}

Repetition evaluate(const RunConfig& cfg, const Posterior& posterior, std::span<const Point> test, int index,
                    bool with_uq) {
  Repetition rep;
  rep.index = index;
  EncodeOptions options = cfg.encode;
  options.seed = derive_seed(cfg.seed, kEncodeStream, static_cast<std::uint64_t>(index));
  const auto start = std::chrono::steady_clock::now();
  if (with_uq) {
    rep.uq = evaluate_uq(posterior, test, cfg.num_samples, cfg.bins, options,
                         derive_seed(cfg.seed, kUqStream, static_cast<std::uint64_t>(index)));
  } else {
    rep.encoding = evaluate_encoding(posterior, test, options);
  }
  rep.eval_seconds = seconds_since(start);
  return rep;
}

}  // namespace

double intrinsic_error(const Manifold& data_manifold, const Point& truth, const Point& output) {
  return data_manifold.distance(truth, on_manifold(data_manifold, output));
}

double euclidean_error(const Point& truth, const Point& output) { return (truth.coords - output.coords).norm(); }

EncodingEvaluation evaluate_encoding(const Posterior& posterior, std::span<const Point> test,
                                     const EncodeOptions& options) {
  const Manifold& dm = posterior.state().data_manifold;
  EncodingEvaluation out;
  out.num_test = static_cast<int>(test.size());
  double sum_i = 0.0;
  double sum_e = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    EncodeOptions per_point = options;
    per_point.seed = derive_seed(options.seed, 0, i);
    Eigen::VectorXd x;
    try {
      x = posterior.encode(test[i], per_point);
    } catch (const CutLocusError&) {
      ++out.excluded;
      continue;
    }
    const Point recon = posterior.reconstruct(x);
    if (!dm.contains(recon.coords, 1e-6)) ++out.violations;
    const double ei = intrinsic_error(dm, test[i], recon);
    const double ee = euclidean_error(test[i], recon);
    out.intrinsic_errors.push_back(ei);
    out.euclidean_errors.push_back(ee);
    sum_i += ei * ei;
    sum_e += ee * ee;
  }
  const auto used = static_cast<double>(out.intrinsic_errors.size());
  if (used == 0.0) throw NumericalError("no test point could be encoded (all on the cut locus)");
  out.rmse_intrinsic = std::sqrt(sum_i / used);
  out.rmse_euclidean = std::sqrt(sum_e / used);
  out.violation_rate = out.violations / used;
  return out;
}

double fraction_closer(const Manifold& data_manifold, const Point& target, const Point& center,
                       std::span<const Point> samples, bool intrinsic) {
  if (samples.empty()) throw DimensionError("fraction_closer: no samples");
  auto dist = [&](const Point& a, const Point& b) {
    return intrinsic ? data_manifold.distance(on_manifold(data_manifold, a), on_manifold(data_manifold, b))
                     : euclidean_error(a, b);
  };
  const double reference = dist(center, target);
  std::size_t closer = 0;
  for (const Point& s : samples) {
    if (dist(center, s) < reference) ++closer;
  }
  return static_cast<double>(closer) / static_cast<double>(samples.size());
}

CalibrationCurve calibration_curve(std::vector<double> fractions, int bins) {
  if (bins < 1) throw DimensionError("calibration_curve: bins must be >= 1");
  CalibrationCurve c;
  c.fractions = std::move(fractions);
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double f : c.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw DimensionError("calibration_curve: fraction outside [0, 1]");
    const int b = std::min(static_cast<int>(f * bins), bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  const auto n = static_cast<double>(c.fractions.size());
  double running = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double count = counts[static_cast<std::size_t>(b)];
    running += count;
    c.density.push_back(n > 0.0 ? count * bins / n : 0.0);
    c.cumulative.push_back(n > 0.0 ? running / n : 0.0);
    c.sup_distance = std::max(c.sup_distance, std::abs(c.cumulative.back() - static_cast<double>(b + 1) / bins));
  }
  return c;
}

UqEvaluation evaluate_uq(const Posterior& posterior, std::span<const Point> test, int num_samples, int bins,
                         const EncodeOptions& options, std::uint64_t seed) {
  const Manifold& dm = posterior.state().data_manifold;
  std::mt19937_64 rng(seed);
  std::vector<double> frac_i, frac_e;
  int excluded = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    EncodeOptions per_point = options;
    per_point.seed = derive_seed(options.seed, 0, i);
    Eigen::VectorXd x;
    try {
      x = posterior.encode(test[i], per_point);
    } catch (const CutLocusError&) {
      ++excluded;
      continue;
    }
    const Point center = posterior.reconstruct(x);
    const std::vector<Point> samples = posterior.sample(x, rng, static_cast<std::size_t>(num_samples));
    frac_i.push_back(fraction_closer(dm, test[i], center, samples, true));
    frac_e.push_back(fraction_closer(dm, test[i], center, samples, false));
  }
  return {calibration_curve(std::move(frac_i), bins), calibration_curve(std::move(frac_e), bins), excluded};
}

UqEvaluation self_calibration(const Posterior& posterior, int draws, int num_samples, int bins, std::uint64_t seed) {
  const ModelState& s = posterior.state();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, s.num_points() - 1);
  std::vector<double> frac_i, frac_e;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd x = s.latents.row(pick(rng)).transpose();
    const Point center = posterior.reconstruct(x);
    const std::vector<Point> draw = posterior.sample(x, rng, static_cast<std::size_t>(num_samples) + 1);
    const std::span<const Point> samples(draw.begin() + 1, draw.end());
    frac_i.push_back(fraction_closer(s.data_manifold, draw.front(), center, samples, true));
    frac_e.push_back(fraction_closer(s.data_manifold, draw.front(), center, samples, false));
  }
  return {calibration_curve(std::move(frac_i), bins), calibration_curve(std::move(frac_e), bins), 0};
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  const auto n = static_cast<double>(values.size());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a combined state
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream * 0x100000001B3ULL + index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset load_dataset(const DatasetSpec& spec) {
  Dataset d;
  if (spec.loader == "directions") {
    d = load_directions(spec.path);
  } else if (spec.loader == "landmarks") {
    d = load_landmarks(spec.path, spec.reference_index);
  } else if (spec.loader == "spd") {
    d = load_spd(spec.path, spec.n);
  } else if (spec.loader == "vectors") {
    d = load_vectors(spec.path);
  } else if (spec.loader == "prices") {
    Eigen::MatrixXd prices = load_prices(spec.path);
    if (spec.log_returns) prices = log_returns(prices);
    d = rolling_covariances(prices, spec.window, spec.stride);
    d.provenance = spec.path + ": " + d.provenance;
  } else if (spec.loader == "synthetic") {
    d = synthesize(spec.synthetic_kind, spec.synthetic_params, spec.synthetic_seed).load();
  } else {
    throw ConfigError("unknown dataset loader '" + spec.loader + "'");
  }

  if (!spec.manifold.empty()) {
    static const std::vector<std::pair<std::string, ManifoldKind>> names{{"euclidean", ManifoldKind::Euclidean},
                                                                         {"sphere", ManifoldKind::Sphere},
                                                                         {"kendall2d", ManifoldKind::Kendall2D},
                                                                         {"spd", ManifoldKind::SpdLogEuclidean}};
    const auto it = std::find_if(names.begin(), names.end(), [&](const auto& e) { return e.first == spec.manifold; });
    if (it == names.end()) throw ConfigError("unknown manifold '" + spec.manifold + "'");
    if (it->second != d.manifold.kind()) {
      throw ConfigError("dataset is on " + d.manifold.name() + ", config expects " + spec.manifold);
    }
  }
  return d;
}

ModelState train_model(const RunConfig& cfg, const Dataset& train, const std::vector<std::size_t>& train_indices) {
  const InitMethod method = resolve_init(cfg);
  std::optional<Eigen::MatrixXd> initial;
  if (cfg.init == "file") {
    const Dataset rows = load_vectors(cfg.init_path);
    if (rows.manifold.ambient_dim() != cfg.latent_dim) throw ConfigError("init file must have latent_dim columns");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train_indices.size()), cfg.latent_dim);
    for (std::size_t i = 0; i < train_indices.size(); ++i) {
      if (train_indices[i] >= rows.size()) throw ConfigError("init file has fewer rows than the dataset");
      x.row(static_cast<Eigen::Index>(i)) = rows.points[train_indices[i]].coords.transpose();
    }
    initial = std::move(x);
  }
  ModelState s = make_model(cfg.model, train.manifold, train.points, cfg.latent_dim, cfg.kernel, method, initial);
  s.labels = train.labels;
  s.label_name = train.label_name;
  return fit(std::move(s), cfg.optimizer);
}

Checkpoint fit_checkpoint(const RunConfig& cfg, const Dataset& data) {
  Checkpoint c;
  if (cfg.train_fraction >= 1.0) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    c.state = train_model(cfg, data, all);
    return c;
  }
  const SplitIndices idx = split_indices(data.size(), cfg.train_fraction, derive_seed(cfg.seed, kSplitStream, 0));
  c.state = train_model(cfg, subset(data, idx.train), idx.train);
  const Dataset test = subset(data, idx.test);
  c.heldout = test.points;
  c.heldout_labels = test.labels;
  return c;
}

ExperimentReport run_experiment(const RunConfig& cfg, const Dataset& data, bool with_uq) {
  if (cfg.train_fraction >= 1.0) throw ConfigError("evaluation needs split.train_fraction < 1");
  ExperimentReport report;
  report.model = cfg.model;
  for (int r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t split_seed = derive_seed(cfg.seed, kSplitStream, static_cast<std::uint64_t>(r));
    const SplitIndices idx = split_indices(data.size(), cfg.train_fraction, split_seed);
    const auto start = std::chrono::steady_clock::now();
    const ModelState state = train_model(cfg, subset(data, idx.train), idx.train);
    const double fit_seconds = seconds_since(start);
    const Dataset test = subset(data, idx.test);
    Repetition rep = evaluate(cfg, Posterior(state), test.points, r, with_uq);
    rep.split_seed = split_seed;
    rep.num_train = state.num_points();
    rep.fit_seconds = fit_seconds;
    report.repetitions.push_back(std::move(rep));
  }
  finalize(report, cfg.bins, with_uq);
  return report;
}

ExperimentReport evaluate_checkpoint(const RunConfig& cfg, const ModelState& state, std::span<const Point> test,
                                     bool with_uq) {
  if (test.empty()) throw DataError("no test points to evaluate");
  for (const Point& p : test) state.data_manifold.check_point(p);
  ExperimentReport report;
  report.model = state.kind;
  Repetition rep = evaluate(cfg, Posterior(state), test, 0, with_uq);
  rep.num_train = state.num_points();
  report.repetitions.push_back(std::move(rep));
  finalize(report, cfg.bins, with_uq);
  return report;
}

}  // namespace wgplvm
