#pragma once

// Direct textbook GP / GPLVM formulas written independently of the library:
// explicit loops, LU inverses and determinants, no shared kernel code.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace wgplvm::oracle {

struct Hyper {
  bool periodic = false;
  double signal_var = 1.0;
  double lengthscale_sq = 1.0;
  double noise_var = 1e-2;
};

inline double kernel(const Hyper& h, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (h.periodic) {
    const double s = std::sin((a(0) - b(0)) / 2.0);
    return h.signal_var * std::exp(-2.0 * s * s / h.lengthscale_sq);
  }
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) r2 += (a(k) - b(k)) * (a(k) - b(k));
  return h.signal_var * std::exp(-r2 / (2.0 * h.lengthscale_sq));
}

inline Eigen::MatrixXd gram(const Hyper& h, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = kernel(h, x.row(i).transpose(), x.row(j).transpose()) + (i == j ? h.noise_var : 0.0);
  return k;
}

// sum_j log N(Y[:, j] | 0, K)
inline double log_likelihood(const Hyper& h, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd k = gram(h, x);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::MatrixXd k_inv = lu.inverse();
  const double log_det = std::log(lu.determinant());
  const double n = static_cast<double>(x.rows());
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const Eigen::VectorXd col = y.col(j);
    total += -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * col.dot(k_inv * col);
  }
  return total;
}

struct Gradient {
  Eigen::MatrixXd latents;
  double log_signal_var = 0.0;
  double log_lengthscale_sq = 0.0;
  double log_noise_var = 0.0;
};

inline Gradient gradient(const Hyper& h, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd k_inv = gram(h, x).fullPivLu().inverse();
  const Eigen::MatrixXd alpha = k_inv * y;
  const double d = static_cast<double>(y.cols());
  // dL/dK for symmetric K.
  const Eigen::MatrixXd w = 0.5 * alpha * alpha.transpose() - 0.5 * d * k_inv;

  Gradient g;
  g.latents = Eigen::MatrixXd::Zero(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double kij = kernel(h, x.row(i).transpose(), x.row(j).transpose());
      double r2 = 0.0;
      for (Eigen::Index a = 0; a < x.cols(); ++a) r2 += std::pow(x(i, a) - x(j, a), 2);
      for (Eigen::Index a = 0; a < x.cols(); ++a) {
        const double dk = h.periodic ? -kij * std::sin(x(i, 0) - x(j, 0)) / h.lengthscale_sq
                                     : -kij * (x(i, a) - x(j, a)) / h.lengthscale_sq;
        g.latents(i, a) += 2.0 * w(i, j) * dk;  // K_ij and K_ji
      }
      const double s = std::sin((x(i, 0) - x(j, 0)) / 2.0);
      const double dell = h.periodic ? kij * 2.0 * s * s / h.lengthscale_sq : kij * r2 / (2.0 * h.lengthscale_sq);
      g.log_signal_var += w(i, j) * kij;
      g.log_lengthscale_sq += w(i, j) * dell;
    }
    g.log_signal_var += w(i, i) * h.signal_var;
    g.log_noise_var += w(i, i) * h.noise_var;
  }
  return g;
}

struct Prediction {
  Eigen::VectorXd mean;
  double variance = 0.0;
};

inline Prediction posterior(const Hyper& h, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            const Eigen::VectorXd& xs) {
  const Eigen::MatrixXd k_inv = gram(h, x).fullPivLu().inverse();
  Eigen::VectorXd ks(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) ks(i) = kernel(h, x.row(i).transpose(), xs);
  return {y.transpose() * k_inv * ks, h.signal_var + h.noise_var - ks.dot(k_inv * ks)};
}

}  // namespace wgplvm::oracle
