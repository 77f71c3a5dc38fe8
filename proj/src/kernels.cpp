#include "wgplvm/kernels.hpp"

#include "wgplvm/errors.hpp"

namespace wgplvm {

namespace {

void check_pair(const KernelSpec& k, Eigen::Index a, Eigen::Index b) {
  if (a != b) throw DimensionError("kernel: latent dimension mismatch");
  if (k.family == KernelFamily::Periodic && a != 1) {
    throw DimensionError("kernel: periodic family needs one-dimensional latents");
  }
}

// Kernel value and the scalar factor s with d k / d x = s * g(x - y), where
// g is (x - y) for Rbf and sin(t - t') for Periodic, plus the log-lengthscale
// derivative.
struct Pieces {
  double value;
  double dlog_len;
};

template <typename A, typename B>
Pieces pieces(const KernelSpec& k, const A& x, const B& y) {
  const double sig = k.signal_var();
  const double len = k.lengthscale_sq();
  if (k.family == KernelFamily::Rbf) {
    const double r2 = (x - y).squaredNorm();
    const double v = sig * std::exp(-0.5 * r2 / len);
    return {v, v * 0.5 * r2 / len};
  }
  const double s = std::sin(0.5 * (x(0) - y(0)));
  const double v = sig * std::exp(-2.0 * s * s / len);
  return {v, v * 2.0 * s * s / len};
}

template <typename A, typename B>
Eigen::VectorXd grad_first(const KernelSpec& k, double value, const A& x, const B& y) {
  const double len = k.lengthscale_sq();
  if (k.family == KernelFamily::Rbf) return -(value / len) * (x - y).transpose();
  Eigen::VectorXd g(1);
  g(0) = -(value / len) * std::sin(x(0) - y(0));
  return g;
}

}  // namespace

std::string to_string(KernelFamily family) { return family == KernelFamily::Rbf ? "rbf" : "periodic"; }

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "rbf") return KernelFamily::Rbf;
  if (name == "periodic") return KernelFamily::Periodic;
  throw ConfigError("unknown kernel family '" + name + "' (expected rbf or periodic)");
}

double eval(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_pair(k, x.size(), y.size());
  return pieces(k, x.transpose(), y.transpose()).value;
}

Eigen::VectorXd eval_grad_first(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_pair(k, x.size(), y.size());
  const double v = pieces(k, x.transpose(), y.transpose()).value;
  return grad_first(k, v, x.transpose(), y.transpose());
}

Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::MatrixXd& latents) {
  check_pair(k, latents.cols(), latents.cols());
  const Eigen::Index n = latents.rows();
  Eigen::MatrixXd out(n, n);
  const double diag = k.signal_var() + k.noise_var();
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = diag;
    for (Eigen::Index j = 0; j < i; ++j) {
      out(i, j) = out(j, i) = pieces(k, latents.row(i), latents.row(j)).value;
    }
  }
  return out;
}

Eigen::VectorXd cross(const KernelSpec& k, const Eigen::MatrixXd& latents, const Eigen::VectorXd& x) {
  check_pair(k, latents.cols(), x.size());
  Eigen::VectorXd out(latents.rows());
  for (Eigen::Index i = 0; i < latents.rows(); ++i) out(i) = pieces(k, x.transpose(), latents.row(i)).value;
  return out;
}

Eigen::MatrixXd cross_grad(const KernelSpec& k, const Eigen::MatrixXd& latents, const Eigen::VectorXd& x) {
  check_pair(k, latents.cols(), x.size());
  Eigen::MatrixXd out(latents.rows(), latents.cols());
  for (Eigen::Index i = 0; i < latents.rows(); ++i) {
    const double v = pieces(k, x.transpose(), latents.row(i)).value;
    out.row(i) = grad_first(k, v, x.transpose(), latents.row(i)).transpose();
  }
  return out;
}

std::array<Eigen::MatrixXd, kNumHyper> grad_hyper(const KernelSpec& k, const Eigen::MatrixXd& latents) {
  check_pair(k, latents.cols(), latents.cols());
  const Eigen::Index n = latents.rows();
  std::array<Eigen::MatrixXd, kNumHyper> out;
  out[kSignalVar] = Eigen::MatrixXd(n, n);
  out[kLengthscaleSq] = Eigen::MatrixXd::Zero(n, n);
  out[kNoiseVar] = k.noise_var() * Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[kSignalVar](i, i) = k.signal_var();
    for (Eigen::Index j = 0; j < i; ++j) {
      const Pieces p = pieces(k, latents.row(i), latents.row(j));
      out[kSignalVar](i, j) = out[kSignalVar](j, i) = p.value;
      out[kLengthscaleSq](i, j) = out[kLengthscaleSq](j, i) = p.dlog_len;
    }
  }
  return out;
}

Eigen::MatrixXd grad_input(const KernelSpec& k, const Eigen::MatrixXd& latents, int i, int a) {
  check_pair(k, latents.cols(), latents.cols());
  if (i < 0 || i >= latents.rows() || a < 0 || a >= latents.cols()) {
    throw DimensionError("grad_input: index out of range");
  }
  const Eigen::Index n = latents.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const double v = pieces(k, latents.row(i), latents.row(j)).value;
    const double g = grad_first(k, v, latents.row(i), latents.row(j))(a);
    out(i, j) = out(j, i) = g;
  }
  return out;
}

ContractedGradient contract_gradient(const KernelSpec& k, const Eigen::MatrixXd& latents,
                                     const Eigen::MatrixXd& weights) {
  check_pair(k, latents.cols(), latents.cols());
  const Eigen::Index n = latents.rows();
  if (weights.rows() != n || weights.cols() != n) throw DimensionError("contract_gradient: weight size");
  ContractedGradient out;
  out.latents = Eigen::MatrixXd::Zero(n, latents.cols());
  double dsig = k.signal_var() * weights.trace();
  double dlen = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const Pieces p = pieces(k, latents.row(i), latents.row(j));
      const double w = weights(i, j) + weights(j, i);
      dsig += w * p.value;
      dlen += w * p.dlog_len;
      const Eigen::VectorXd g = grad_first(k, p.value, latents.row(i), latents.row(j));
      out.latents.row(i) += w * g.transpose();
      out.latents.row(j) -= w * g.transpose();
    }
  }
  out.hyper[kSignalVar] = dsig;
  out.hyper[kLengthscaleSq] = dlen;
  out.hyper[kNoiseVar] = k.noise_var() * weights.trace();
  return out;
}

}  // namespace wgplvm
