#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wgplvm/checkpoint.hpp"
#include "wgplvm/config.hpp"
#include "wgplvm/data_io.hpp"
#include "wgplvm/model.hpp"

namespace wgplvm {

// Geodesic distance on `data_manifold`; `output` is projected first when it is
// off the manifold (raw Gplvm predictions).
double intrinsic_error(const Manifold& data_manifold, const Point& truth, const Point& output);
double euclidean_error(const Point& truth, const Point& output);

struct EncodingEvaluation {
  int num_test = 0;
  // Test points on the cut locus of the basepoint; not encoded.
  int excluded = 0;
  double rmse_intrinsic = 0.0;
  double rmse_euclidean = 0.0;
  // Reconstructions off the data manifold by more than 1e-6.
  int violations = 0;
  double violation_rate = 0.0;
  std::vector<double> intrinsic_errors;
  std::vector<double> euclidean_errors;
};

EncodingEvaluation evaluate_encoding(const Posterior& posterior, std::span<const Point> test,
                                     const EncodeOptions& options);

// Fraction of `samples` strictly closer to `center` than `target`.
double fraction_closer(const Manifold& data_manifold, const Point& target, const Point& center,
                       std::span<const Point> samples, bool intrinsic);

struct CalibrationCurve {
  std::vector<double> fractions;
  // Equal-width bins on [0, 1], the last one closed.
  std::vector<double> density;
  // Empirical CDF at the right bin edges; ends at 1.
  std::vector<double> cumulative;
  // max_b |cumulative[b] - (b + 1) / bins|
  double sup_distance = 0.0;
};

CalibrationCurve calibration_curve(std::vector<double> fractions, int bins);

struct UqEvaluation {
  CalibrationCurve intrinsic;
  CalibrationCurve euclidean;
  int excluded = 0;
};

// Per test point: encode, draw `num_samples` predictive samples at the code,
// and record the fraction closer to the mean prediction than the test point.
UqEvaluation evaluate_uq(const Posterior& posterior, std::span<const Point> test, int num_samples, int bins,
                         const EncodeOptions& options, std::uint64_t seed);

// Same statistic with test points drawn from the model's own predictive at
// training latents chosen uniformly; calibrated by construction.
UqEvaluation self_calibration(const Posterior& posterior, int draws, int num_samples, int bins, std::uint64_t seed);

struct Aggregate {
  double mean = 0.0;
  // Sample standard deviation over sqrt(n); 0 for a single value.
  double std_error = 0.0;
};

Aggregate aggregate(std::span<const double> values);

// Deterministic seed stream for repetition `index` of purpose `stream`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

Dataset load_dataset(const DatasetSpec& spec);

// Model for `cfg` on `train`: initialization per cfg.init, then fit.
// `train_indices` selects rows of the init file when cfg.init == "file".
ModelState train_model(const RunConfig& cfg, const Dataset& train, const std::vector<std::size_t>& train_indices);

// Train/held-out checkpoint for cmd_fit; trains on everything when
// cfg.train_fraction == 1.
Checkpoint fit_checkpoint(const RunConfig& cfg, const Dataset& data);

struct Repetition {
  int index = 0;
  std::uint64_t split_seed = 0;
  int num_train = 0;
  double fit_seconds = 0.0;
  double eval_seconds = 0.0;
  EncodingEvaluation encoding;
  UqEvaluation uq;
};

struct ExperimentReport {
  ModelKind model = ModelKind::Wgplvm;
  std::vector<Repetition> repetitions;
  Aggregate rmse_intrinsic;
  Aggregate rmse_euclidean;
  Aggregate sup_distance_intrinsic;
  Aggregate sup_distance_euclidean;
  // Calibration pooled over repetitions.
  CalibrationCurve pooled_intrinsic;
  CalibrationCurve pooled_euclidean;
  int excluded = 0;
  double violation_rate = 0.0;
};

// cfg.repetitions independent splits; each repetition fits on its train part
// and evaluates reconstruction (with_uq = false) or calibration (true) on
// its test part.
ExperimentReport run_experiment(const RunConfig& cfg, const Dataset& data, bool with_uq);

// Single evaluation of a fitted model on given test points.
ExperimentReport evaluate_checkpoint(const RunConfig& cfg, const ModelState& state, std::span<const Point> test,
                                     bool with_uq);

}  // namespace wgplvm
