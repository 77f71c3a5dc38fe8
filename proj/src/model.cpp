#include "wgplvm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace wgplvm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w >= kTwoPi ? 0.0 : w;
}

void wrap_periodic(const KernelSpec& k, Eigen::MatrixXd& latents) {
  if (k.family != KernelFamily::Periodic) return;
  latents = latents.unaryExpr(&wrap_angle);
}

struct TangentData {
  Point basepoint;
  TangentFrame frame;
  Eigen::MatrixXd rows;
};

TangentData tangent_data(const Manifold& m, std::span<const Point> data) {
  TangentData out;
  out.basepoint = frechet_mean(m, data);
  out.frame = m.tangent_basis(out.basepoint);
  out.rows.resize(static_cast<Eigen::Index>(data.size()), m.intrinsic_dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = out.frame.to_intrinsic(m.log(out.basepoint, data[i])).transpose();
  }
  return out;
}

// Unstandardized principal scores (N x q), components ordered by decreasing
// variance, each eigenvector signed so its largest-magnitude entry is positive.
Eigen::MatrixXd principal_scores(const Eigen::MatrixXd& y, int q) {
  const Eigen::Index n = y.rows();
  const Eigen::MatrixXd centered = y.rowwise() - y.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pga: eigendecomposition failed");
  Eigen::MatrixXd dirs(y.cols(), q);
  for (int c = 0; c < q; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(y.cols() - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    dirs.col(c) = v;
  }
  return centered * dirs;
}

Eigen::MatrixXd standardized_scores(const Eigen::MatrixXd& y, int q) {
  Eigen::MatrixXd scores = principal_scores(y, q);
  const double denom = static_cast<double>(scores.rows() - 1);
  for (int c = 0; c < q; ++c) {
    const double sd = std::sqrt(scores.col(c).squaredNorm() / denom);
    if (sd > 1e-12) {
      scores.col(c) /= sd;
    } else {
      scores.col(c).setZero();
    }
  }
  return scores;
}

Eigen::MatrixXd angle_latents(const Eigen::MatrixXd& y) {
  if (y.cols() < 2) throw DimensionError("angle initialization needs a tangent dimension >= 2");
  const Eigen::MatrixXd scores = principal_scores(y, 2);
  Eigen::MatrixXd latents(scores.rows(), 1);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) latents(i, 0) = wrap_angle(std::atan2(scores(i, 1), scores(i, 0)));
  return latents;
}

void check_sizes(std::span<const Point> data, int q, int d) {
  if (q < 1) throw DimensionError("latent dimension must be >= 1");
  if (static_cast<int>(data.size()) <= q) throw DimensionError("need more data points than latent dimensions");
  if (q >= d) throw DimensionError("latent dimension must be below the tangent dimension");
}

Eigen::VectorXd flatten(const Gradients& g, bool with_hyper) {
  const Eigen::Index nl = g.latents.size();
  Eigen::VectorXd out(nl + kNumHyper);
  out.head(nl) = Eigen::Map<const Eigen::VectorXd>(g.latents.data(), nl);
  for (int h = 0; h < kNumHyper; ++h) out(nl + h) = with_hyper ? g.hyper[static_cast<std::size_t>(h)] : 0.0;
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Wgplvm:
      return "wgplvm";
    case ModelKind::Gplvm:
      return "gplvm";
    case ModelKind::GplvmProj:
      return "gplvm_proj";
  }
  return {};
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "wgplvm") return ModelKind::Wgplvm;
  if (name == "gplvm") return ModelKind::Gplvm;
  if (name == "gplvm_proj") return ModelKind::GplvmProj;
  throw ConfigError("unknown model '" + name + "' (expected wgplvm, gplvm or gplvm_proj)");
}

LatentInit init_latents_pga(const Manifold& m, std::span<const Point> data, int q) {
  check_sizes(data, q, m.intrinsic_dim());
  TangentData t = tangent_data(m, data);
  return LatentInit{t.basepoint, standardized_scores(t.rows, q)};
}

LatentInit init_latents_pga_angle(const Manifold& m, std::span<const Point> data) {
  check_sizes(data, 1, m.intrinsic_dim());
  TangentData t = tangent_data(m, data);
  return LatentInit{t.basepoint, angle_latents(t.rows)};
}

ModelState make_model(ModelKind kind, const Manifold& data_manifold, std::vector<Point> data, int q,
                      const KernelSpec& kernel, InitMethod init,
                      const std::optional<Eigen::MatrixXd>& initial_latents) {
  if (data.empty()) throw DimensionError("make_model: empty dataset");
  for (const Point& p : data) data_manifold.check_point(p);
  if (kernel.family == KernelFamily::Periodic && q != 1) {
    throw DimensionError("periodic kernel needs a one-dimensional latent space");
  }

  ModelState s;
  s.kind = kind;
  s.data_manifold = data_manifold;
  s.manifold = kind == ModelKind::Wgplvm ? data_manifold : Manifold::euclidean(data_manifold.ambient_dim());
  s.kernel = kernel;
  check_sizes(data, q, s.manifold.intrinsic_dim());

  TangentData t = tangent_data(s.manifold, data);
  s.basepoint = t.basepoint;
  s.frame = t.frame;
  s.tangent_data = std::move(t.rows);
  s.data = std::move(data);

  if (initial_latents) {
    if (initial_latents->rows() != s.num_points() || initial_latents->cols() != q) {
      throw DimensionError("initial latents must be N x q");
    }
    s.latents = *initial_latents;
  } else if (init == InitMethod::PgaAngle) {
    if (q != 1) throw DimensionError("angle initialization produces one latent dimension");
    s.latents = angle_latents(s.tangent_data);
  } else {
    s.latents = standardized_scores(s.tangent_data, q);
  }
  wrap_periodic(s.kernel, s.latents);
  return s;
}

ModelState baseline_gplvm(const Manifold& data_manifold, std::vector<Point> data, int q, const KernelSpec& kernel,
                          bool projected, InitMethod init) {
  return make_model(projected ? ModelKind::GplvmProj : ModelKind::Gplvm, data_manifold, std::move(data), q, kernel,
                    init);
}

double objective(const ModelState& s) {
  const JitteredCholesky chol = robust_cholesky(gram(s.kernel, s.latents));
  const double n = s.num_points();
  const double d = s.tangent_dim();
  const double quad = (s.tangent_data.array() * chol.solve(s.tangent_data).array()).sum();
  return -0.5 * d * n * kLog2Pi - 0.5 * d * chol.log_det() - 0.5 * quad;
}

Gradients gradients(const ModelState& s) {
  const JitteredCholesky chol = robust_cholesky(gram(s.kernel, s.latents));
  const Eigen::Index n = s.num_points();
  const double d = s.tangent_dim();
  const Eigen::MatrixXd alpha = chol.solve(s.tangent_data);
  const Eigen::MatrixXd k_inv = chol.solve(Eigen::MatrixXd::Identity(n, n));

  Gradients out;
  const double quad = (s.tangent_data.array() * alpha.array()).sum();
  out.objective = -0.5 * d * static_cast<double>(n) * kLog2Pi - 0.5 * d * chol.log_det() - 0.5 * quad;

  // dL/dK = 1/2 K^-1 Y Y^T K^-1 - d/2 K^-1
  const Eigen::MatrixXd weights = 0.5 * alpha * alpha.transpose() - 0.5 * d * k_inv;
  ContractedGradient c = contract_gradient(s.kernel, s.latents, weights);
  out.latents = std::move(c.latents);
  out.hyper = c.hyper;
  return out;
}

ModelState fit(ModelState s, const OptimizerConfig& config) {
  std::vector<TraceEntry> trace;
  auto evaluate = [&](const ModelState& st) {
    try {
      Gradients g = gradients(st);
      if (!std::isfinite(g.objective) || !g.latents.allFinite()) {
        throw NumericalError("objective or gradient is not finite");
      }
      return g;
    } catch (const NumericalError& e) {
      throw FitAborted(std::string("fit aborted: ") + e.what(), trace);
    }
  };

  Gradients g = evaluate(s);
  trace.push_back({0, g.objective});
  double best_objective = g.objective;
  Eigen::MatrixXd best_latents = s.latents;
  KernelSpec best_kernel = s.kernel;

  const Eigen::Index nl = s.latents.size();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(nl + kNumHyper);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(nl + kNumHyper);
  double b1 = 1.0;
  double b2 = 1.0;

  for (int it = 1; it <= config.max_iter; ++it) {
    Eigen::VectorXd grad = flatten(g, config.optimize_hyperparameters);
    if (s.kernel.log_noise_var <= config.min_log_noise_var && grad(nl + kNoiseVar) < 0.0) {
      grad(nl + kNoiseVar) = 0.0;
    }
    if (grad.lpNorm<Eigen::Infinity>() < config.grad_tol) break;

    m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
    m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad.cwiseProduct(grad);
    b1 *= config.beta1;
    b2 *= config.beta2;
    const Eigen::VectorXd step =
        config.learning_rate * (m1 / (1.0 - b1)).cwiseQuotient(((m2 / (1.0 - b2)).cwiseSqrt().array() + config.epsilon).matrix());

    Eigen::Map<Eigen::VectorXd>(s.latents.data(), nl) += step.head(nl);
    if (config.optimize_hyperparameters) {
      s.kernel.log_signal_var += step(nl + kSignalVar);
      s.kernel.log_lengthscale_sq += step(nl + kLengthscaleSq);
      s.kernel.log_noise_var = std::max(s.kernel.log_noise_var + step(nl + kNoiseVar), config.min_log_noise_var);
    }
    wrap_periodic(s.kernel, s.latents);

    g = evaluate(s);
    trace.push_back({it, g.objective});
    if (g.objective > best_objective) {
      best_objective = g.objective;
      best_latents = s.latents;
      best_kernel = s.kernel;
    }
  }

  s.latents = std::move(best_latents);
  s.kernel = best_kernel;
  s.fit_trace = std::move(trace);
  return s;
}

Posterior::Posterior(const ModelState& s)
    : state_(s), chol_(robust_cholesky(gram(s.kernel, s.latents))), alpha_(chol_.solve(s.tangent_data)) {
  lower_ = s.latents.colwise().minCoeff().transpose();
  upper_ = s.latents.colwise().maxCoeff().transpose();
}

PosteriorPrediction Posterior::predict(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd ks = cross(state_.kernel, state_.latents, x);
  PosteriorPrediction out;
  out.mean = alpha_.transpose() * ks;
  const double prior = state_.kernel.signal_var() + state_.kernel.noise_var();
  out.variance = std::max(prior - ks.dot(chol_.llt.solve(ks)), 0.0);
  return out;
}

Point Posterior::mean_point(const Eigen::VectorXd& x) const {
  return state_.manifold.exp(state_.frame.from_intrinsic(predict(x).mean));
}

Point Posterior::reconstruct(const Eigen::VectorXd& x) const {
  Point p = mean_point(x);
  if (state_.kind == ModelKind::GplvmProj) return state_.data_manifold.project(p.coords);
  return p;
}

std::vector<Point> Posterior::sample(const Eigen::VectorXd& x, std::mt19937_64& rng, std::size_t count) const {
  const PosteriorPrediction pred = predict(x);
  const double sd = std::sqrt(pred.variance);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count);
  Eigen::VectorXd z(pred.mean.size());
  for (std::size_t i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
    Point p = state_.manifold.exp(state_.frame.from_intrinsic(pred.mean + sd * z));
    if (state_.kind == ModelKind::GplvmProj) p = state_.data_manifold.project(p.coords);
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::VectorXd Posterior::tangent_coords(const Point& p) const {
  return state_.frame.to_intrinsic(state_.manifold.log(state_.basepoint, p));
}

double Posterior::encode_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y, Eigen::VectorXd* grad) const {
  const KernelSpec& k = state_.kernel;
  const Eigen::VectorXd ks = cross(k, state_.latents, x);
  const Eigen::VectorXd k_inv_ks = chol_.llt.solve(ks);
  const Eigen::VectorXd mean = alpha_.transpose() * ks;
  const double prior = k.signal_var() + k.noise_var();
  const double var = std::max(prior - ks.dot(k_inv_ks), 1e-14 * prior);
  const Eigen::VectorXd r = y - mean;
  const double r2 = r.squaredNorm();
  const double d = static_cast<double>(y.size());
  const double value = -0.5 * d * (kLog2Pi + std::log(var)) - 0.5 * r2 / var;
  if (grad != nullptr) {
    const Eigen::MatrixXd jac = cross_grad(k, state_.latents, x);  // N x q
    const Eigen::MatrixXd dmean = alpha_.transpose() * jac;        // d x q
    const Eigen::VectorXd dvar = -2.0 * jac.transpose() * k_inv_ks;
    *grad = dmean.transpose() * r / var + (-0.5 * d / var + 0.5 * r2 / (var * var)) * dvar;
  }
  return value;
}

Eigen::VectorXd Posterior::encode(const Point& p, const EncodeOptions& options) const {
  const Eigen::VectorXd y = tangent_coords(p);
  const int q = state_.latent_dim();
  const bool periodic = state_.kernel.family == KernelFamily::Periodic;

  std::vector<Eigen::VectorXd> starts;
  {
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd arg = state_.latents.row(0).transpose();
    for (int i = 0; i < state_.num_points(); ++i) {
      const Eigen::VectorXd xi = state_.latents.row(i).transpose();
      const double f = encode_objective(xi, y);
      if (f > best) {
        best = f;
        arg = xi;
      }
    }
    starts.push_back(arg);
  }
  std::mt19937_64 rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd x(q);
    for (int a = 0; a < q; ++a) {
      const double lo = periodic ? 0.0 : lower_(a);
      const double hi = periodic ? kTwoPi : upper_(a);
      x(a) = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    starts.push_back(std::move(x));
  }

  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (Eigen::VectorXd x : starts) {
    Eigen::VectorXd g;
    double f = encode_objective(x, y, &g);
    if (!std::isfinite(f)) continue;
    double step = 1.0;
    for (int it = 0; it < options.max_iter; ++it) {
      const double gn2 = g.squaredNorm();
      if (!(gn2 > 1e-26)) break;
      bool moved = false;
      double gain = 0.0;
      while (step > 1e-16) {
        const Eigen::VectorXd trial = x + step * g;
        Eigen::VectorXd trial_g;
        const double ft = encode_objective(trial, y, &trial_g);
        if (std::isfinite(ft) && ft >= f + 1e-4 * step * gn2) {
          gain = ft - f;
          x = trial;
          f = ft;
          g = std::move(trial_g);
          step = std::min(step * 2.0, 1e6);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved || gain <= 1e-13 * (1.0 + std::abs(f))) break;
    }
    if (f > best_value) {
      best_value = f;
      best_x = x;
    }
  }
  if (best_x.size() == 0) throw NumericalError("encode: every start produced a non-finite objective");
  if (periodic) best_x = best_x.unaryExpr(&wrap_angle);
  return best_x;
}

PosteriorPrediction predict(const ModelState& s, const Eigen::VectorXd& x) { return Posterior(s).predict(x); }

Eigen::VectorXd encode(const ModelState& s, const Point& p, const EncodeOptions& options) {
  return Posterior(s).encode(p, options);
}

}  // namespace wgplvm
