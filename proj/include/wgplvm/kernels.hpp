#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

namespace wgplvm {

enum class KernelFamily { Rbf, Periodic };

std::string to_string(KernelFamily family);
// Accepts "rbf" and "periodic"; throws ConfigError otherwise.
KernelFamily kernel_family_from_string(const std::string& name);

// Stationary covariance on the latent space. All hyperparameters live in log
// space: signal variance sigma^2, squared lengthscale l^2 and the white-noise
// variance added on Gram diagonals.
//
//   Rbf:      sigma^2 exp(-|x - x'|^2 / (2 l^2))
//   Periodic: sigma^2 exp(-2 sin^2((t - t') / 2) / l^2)   (1-D latents, period 2 pi)
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double log_signal_var = 0.0;
  double log_lengthscale_sq = 0.0;
  double log_noise_var = std::log(1e-2);

  double signal_var() const { return std::exp(log_signal_var); }
  double lengthscale_sq() const { return std::exp(log_lengthscale_sq); }
  double noise_var() const { return std::exp(log_noise_var); }
};

inline constexpr int kNumHyper = 3;
enum HyperIndex : int { kSignalVar = 0, kLengthscaleSq = 1, kNoiseVar = 2 };

// Throws DimensionError on size mismatch or multi-dimensional periodic input.
double eval(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
// d k(x, y) / d x.
Eigen::VectorXd eval_grad_first(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// N x N, noise variance on the diagonal. Rows of `latents` are latent points.
Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::MatrixXd& latents);
// k(x, latents_i) for every row i (no noise).
Eigen::VectorXd cross(const KernelSpec& k, const Eigen::MatrixXd& latents, const Eigen::VectorXd& x);
// d/dx of cross(): N x q.
Eigen::MatrixXd cross_grad(const KernelSpec& k, const Eigen::MatrixXd& latents, const Eigen::VectorXd& x);

// dK / d(log hyperparameter), indexed by HyperIndex.
std::array<Eigen::MatrixXd, kNumHyper> grad_hyper(const KernelSpec& k, const Eigen::MatrixXd& latents);
// dK / dX(i, a); nonzero only in row and column i.
Eigen::MatrixXd grad_input(const KernelSpec& k, const Eigen::MatrixXd& latents, int i, int a);

// For symmetric `weights` W, returns the N x q matrix of d(sum_jk W_jk K_jk) / dX(i, a)
// and the kNumHyper derivatives with respect to the log hyperparameters.
struct ContractedGradient {
  Eigen::MatrixXd latents;
  std::array<double, kNumHyper> hyper{};
};
ContractedGradient contract_gradient(const KernelSpec& k, const Eigen::MatrixXd& latents,
                                     const Eigen::MatrixXd& weights);

}  // namespace wgplvm
