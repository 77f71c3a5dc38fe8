#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "wgplvm/manifolds.hpp"

namespace wgplvm {

// Zero-mean Gaussian N(0, cov) on the tangent space at a basepoint, pushed onto
// the manifold by the exponential map. `cov` is expressed in the intrinsic
// coordinates of `frame`.
class WrappedGaussian {
 public:
  // Builds the frame at `basepoint`. Throws InvalidPointError/DimensionError,
  // and NumericalError when cov is not symmetric PSD (tolerance 1e-10).
  WrappedGaussian(Manifold manifold, const Point& basepoint, Eigen::MatrixXd cov);
  WrappedGaussian(Manifold manifold, TangentFrame frame, Eigen::MatrixXd cov);

  const Manifold& manifold() const { return manifold_; }
  const Point& basepoint() const { return frame_.base(); }
  const TangentFrame& frame() const { return frame_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  int dim() const { return static_cast<int>(cov_.rows()); }

 private:
  Manifold manifold_;
  TangentFrame frame_;
  Eigen::MatrixXd cov_;
};

// Jointly wrapped pair on M1 x M2 with tangent cross-covariance K12 (dim1 x dim2).
class JointWrappedGaussian {
 public:
  // Throws NumericalError when the block covariance is not PSD within 1e-10.
  JointWrappedGaussian(WrappedGaussian first, WrappedGaussian second, Eigen::MatrixXd cross_cov);

  const WrappedGaussian& first() const { return first_; }
  const WrappedGaussian& second() const { return second_; }
  const Eigen::MatrixXd& cross_cov() const { return cross_cov_; }

  Eigen::MatrixXd block_cov() const;
  // The same distribution as a single WrappedGaussian on Product(M1, M2).
  WrappedGaussian as_product() const;

 private:
  WrappedGaussian first_;
  WrappedGaussian second_;
  Eigen::MatrixXd cross_cov_;
};

// Draws through from_intrinsic then exp. Standard normals come from
// std::normal_distribution over std::mt19937_64 seeded with `seed`.
std::vector<Point> sample(const WrappedGaussian& w, std::uint64_t seed, std::size_t count);

struct LogDensity {
  double value = 0.0;
  // Diagonal jitter that had to be added to cov, 0 when none.
  double jitter = 0.0;

  bool jittered() const { return jitter > 0.0; }
};

// log N(Log_mu(p) | 0, K) using only the minimal-norm preimage. This is a lower
// bound of the wrapped density, exact when the cut locus is empty.
LogDensity log_density_approx(const WrappedGaussian& w, const Point& p);

// X1 | X2 = observed, keeping the single mixture component of the minimal-norm
// preimage. The conditional covariance is carried from the frame at mu1 to the
// frame at the new basepoint through ambient coordinates (T = F_new^T F_old).
WrappedGaussian condition(const JointWrappedGaussian& j, const Point& observed);

}  // namespace wgplvm
