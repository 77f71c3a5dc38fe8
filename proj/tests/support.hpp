#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "wgplvm/manifolds.hpp"
#include "wgplvm/model.hpp"
#include "wgplvm/spd.hpp"

namespace wgplvm::testing {

inline Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n, double sigma = 1.0) {
  std::normal_distribution<double> z(0.0, sigma);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = z(rng);
  return v;
}

inline Point random_point(const Manifold& m, std::mt19937_64& rng) {
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      return Point{normal_vector(rng, m.ambient_dim())};
    case ManifoldKind::Sphere:
    case ManifoldKind::Kendall2D:
      return m.project(normal_vector(rng, m.ambient_dim()));
    case ManifoldKind::SpdLogEuclidean:
      return Point{spd::to_coords(spd::exp_matrix(spd::to_matrix(normal_vector(rng, m.ambient_dim(), 0.5))))};
    case ManifoldKind::Product: {
      Eigen::VectorXd out(m.ambient_dim());
      Eigen::Index off = 0;
      for (const Manifold& f : m.factors()) {
        out.segment(off, f.ambient_dim()) = random_point(f, rng).coords;
        off += f.ambient_dim();
      }
      return Point{out};
    }
  }
  return {};
}

// Largest tangent norm for which log(exp(v)) = v is expected.
inline double injectivity_bound(const Manifold& m) {
  switch (m.kind()) {
    case ManifoldKind::Sphere:
      return std::numbers::pi - 1e-3;
    case ManifoldKind::Kendall2D:
      return std::numbers::pi / 2.0 - 1e-3;
    case ManifoldKind::Product: {
      double bound = 3.0;
      for (const Manifold& f : m.factors()) bound = std::min(bound, injectivity_bound(f));
      return bound;
    }
    default:
      return 3.0;
  }
}

// Tangent vector at p with norm uniform in [0, max_norm).
inline Eigen::VectorXd random_tangent(const Manifold& m, const Point& p, std::mt19937_64& rng, double max_norm) {
  Eigen::VectorXd v = m.project_to_tangent(p, normal_vector(rng, m.ambient_dim()));
  const double n = v.norm();
  if (n == 0.0) return v;
  return v * (std::uniform_real_distribution<double>(0.0, max_norm)(rng) / n);
}

inline std::vector<Manifold> geometry_suite() {
  return {Manifold::sphere(2), Manifold::sphere(5), Manifold::kendall2d(8),
          Manifold::spd(3),    Manifold::spd(10),   Manifold::euclidean(5)};
}

// n points Exp_c(v_i) around a random centre c, |v_i| < spread.
inline std::vector<Point> clustered_points(const Manifold& m, std::mt19937_64& rng, int n, double spread) {
  const Point c = random_point(m, rng);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back(m.exp(c, random_tangent(m, c, rng, spread)));
  return out;
}

// Random model instance: clustered data, N(0,1) latents, perturbed hyperparameters.
inline ModelState random_instance(const Manifold& m, std::mt19937_64& rng, int n, int q, KernelFamily family,
                                  ModelKind kind = ModelKind::Wgplvm) {
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  KernelSpec k;
  k.family = family;
  k.log_signal_var = jitter(rng);
  k.log_lengthscale_sq = jitter(rng);
  k.log_noise_var = std::log(0.05) + jitter(rng);
  Eigen::MatrixXd x(n, q);
  for (int i = 0; i < n; ++i) x.row(i) = normal_vector(rng, q).transpose();
  return make_model(kind, m, clustered_points(m, rng, n, 0.6), q, k, InitMethod::Pga, x);
}

// Central differences of objective() in every latent and log hyperparameter,
// flattened as latents (column-major) followed by the hyperparameters.
inline Eigen::VectorXd finite_difference_gradient(const ModelState& s, double h = 1e-5) {
  const Eigen::Index nl = s.latents.size();
  Eigen::VectorXd out(nl + kNumHyper);
  for (Eigen::Index k = 0; k < nl + kNumHyper; ++k) {
    ModelState plus = s;
    ModelState minus = s;
    auto bump = [&](ModelState& st, double delta) {
      if (k < nl) {
        st.latents.data()[k] += delta;
      } else if (k == nl + kSignalVar) {
        st.kernel.log_signal_var += delta;
      } else if (k == nl + kLengthscaleSq) {
        st.kernel.log_lengthscale_sq += delta;
      } else {
        st.kernel.log_noise_var += delta;
      }
    };
    bump(plus, h);
    bump(minus, -h);
    out(k) = (objective(plus) - objective(minus)) / (2.0 * h);
  }
  return out;
}

inline Eigen::VectorXd flat_gradient(const Gradients& g) {
  const Eigen::Index nl = g.latents.size();
  Eigen::VectorXd out(nl + kNumHyper);
  out.head(nl) = Eigen::Map<const Eigen::VectorXd>(g.latents.data(), nl);
  for (int h = 0; h < kNumHyper; ++h) out(nl + h) = g.hyper[static_cast<std::size_t>(h)];
  return out;
}

// Largest |a - fd| / max(|fd|, 1e-3 |fd|_inf) over all coordinates.
inline double gradient_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
  const double floor = 1e-3 * fd.lpNorm<Eigen::Infinity>();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < fd.size(); ++k) {
    worst = std::max(worst, std::abs(analytic(k) - fd(k)) / std::max({std::abs(fd(k)), floor, 1e-300}));
  }
  return worst;
}

}  // namespace wgplvm::testing
