#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wgplvm/errors.hpp"
#include "wgplvm/kernels.hpp"
#include "wgplvm/linalg.hpp"
#include "wgplvm/manifolds.hpp"

namespace wgplvm {

enum class ModelKind {
  Wgplvm,     // tangent-space GP at the Frechet mean, pushed forward by Exp
  Gplvm,      // Euclidean GPLVM on ambient coordinates
  GplvmProj,  // Euclidean GPLVM with predictions projected onto the data manifold
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
};

struct ModelState {
  ModelKind kind = ModelKind::Wgplvm;
  // Manifold the observations live on.
  Manifold data_manifold = Manifold::euclidean(1);
  // Manifold the GP is wrapped onto: data_manifold for Wgplvm, Euclidean(ambient) otherwise.
  Manifold manifold = Manifold::euclidean(1);
  std::vector<Point> data;
  std::vector<std::string> labels;
  std::string label_name;
  Point basepoint;
  TangentFrame frame;
  // N x d, row i = to_intrinsic(Log_basepoint(data_i)).
  Eigen::MatrixXd tangent_data;
  // N x q.
  Eigen::MatrixXd latents;
  KernelSpec kernel;
  std::vector<TraceEntry> fit_trace;

  int num_points() const { return static_cast<int>(tangent_data.rows()); }
  int tangent_dim() const { return static_cast<int>(tangent_data.cols()); }
  int latent_dim() const { return static_cast<int>(latents.cols()); }
};

struct LatentInit {
  Point basepoint;
  Eigen::MatrixXd latents;
};

// Tangent PCA at the Frechet mean: scores on the top-q eigenvectors of the
// tangent sample covariance, each column standardized to unit variance
// (columns with zero variance stay zero). Requires N > q >= 1.
LatentInit init_latents_pga(const Manifold& m, std::span<const Point> data, int q);

// One-dimensional circular initialization for periodic kernels: the angle
// atan2(s2, s1) of the first two principal scores, wrapped to [0, 2 pi).
LatentInit init_latents_pga_angle(const Manifold& m, std::span<const Point> data);

enum class InitMethod { Pga, PgaAngle };

// Assembles a model: Frechet mean basepoint, frame, tangent data and latents.
// `initial_latents` overrides the PGA latents when given. For the Euclidean
// baselines the data are used through their ambient coordinates.
ModelState make_model(ModelKind kind, const Manifold& data_manifold, std::vector<Point> data, int q,
                      const KernelSpec& kernel, InitMethod init = InitMethod::Pga,
                      const std::optional<Eigen::MatrixXd>& initial_latents = std::nullopt);

// Euclidean GPLVM on ambient coordinates; projected when `projected` is set.
ModelState baseline_gplvm(const Manifold& data_manifold, std::vector<Point> data, int q, const KernelSpec& kernel,
                          bool projected, InitMethod init = InitMethod::Pga);

// Approximate log marginal likelihood
//   -(dN/2) ln 2pi - (d/2) ln|K| - 1/2 Tr(K^-1 Y Y^T).
double objective(const ModelState& s);

struct Gradients {
  double objective = 0.0;
  Eigen::MatrixXd latents;                  // N x q
  std::array<double, kNumHyper> hyper{};    // by HyperIndex, log space
};

Gradients gradients(const ModelState& s);

struct OptimizerConfig {
  double learning_rate = 1e-2;
  int max_iter = 2000;
  double grad_tol = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool optimize_hyperparameters = true;
  // Lower bound for the log noise variance during optimization.
  double min_log_noise_var = std::log(1e-6);
};

// Thrown when the objective becomes non-finite; carries the trace so far.
class FitAborted : public NumericalError {
 public:
  FitAborted(const std::string& what, std::vector<TraceEntry> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

// Adam-style gradient ascent on latents and log hyperparameters. The trace
// holds the objective at iteration 0 (start) and after every update; the
// returned parameters are the best visited, so the final objective is never
// below the initial one. Periodic latents are wrapped to [0, 2 pi).
ModelState fit(ModelState s, const OptimizerConfig& config = {});

struct PosteriorPrediction {
  Eigen::VectorXd mean;   // mu*(x) in intrinsic tangent coordinates at the basepoint
  double variance = 0.0;  // v*(x), shared by every coordinate
};

struct EncodeOptions {
  int restarts = 9;
  std::uint64_t seed = 0;
  int max_iter = 500;
};

// Conditioned GP with cached factorization; read-only and shareable.
class Posterior {
 public:
  explicit Posterior(const ModelState& s);

  const ModelState& state() const { return state_; }

  PosteriorPrediction predict(const Eigen::VectorXd& x) const;

  // Exp of the predictive mean at the basepoint, on the modelling manifold.
  Point mean_point(const Eigen::VectorXd& x) const;
  // Model output in data-manifold terms: mean_point, projected for GplvmProj.
  // For Gplvm the raw ambient prediction is returned (possibly off-manifold).
  Point reconstruct(const Eigen::VectorXd& x) const;
  // Predictive draws Exp_m(mu* + sqrt(v*) z), same convention as reconstruct().
  std::vector<Point> sample(const Eigen::VectorXd& x, std::mt19937_64& rng, std::size_t count) const;

  // Intrinsic tangent coordinates of a data point; throws CutLocusError.
  Eigen::VectorXd tangent_coords(const Point& p) const;
  // log N(y | mu*(x), v*(x) I) and its gradient in x.
  double encode_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          Eigen::VectorXd* grad = nullptr) const;
  // argmax_x of encode_objective for the tangent coordinates of p, multi-start:
  // best training latent plus `restarts` uniform draws over the latent range.
  Eigen::VectorXd encode(const Point& p, const EncodeOptions& options = {}) const;

 private:
  ModelState state_;
  JitteredCholesky chol_;
  Eigen::MatrixXd alpha_;  // K^-1 Y
  Eigen::VectorXd lower_, upper_;
};

PosteriorPrediction predict(const ModelState& s, const Eigen::VectorXd& x);
Eigen::VectorXd encode(const ModelState& s, const Point& p, const EncodeOptions& options = {});

}  // namespace wgplvm
