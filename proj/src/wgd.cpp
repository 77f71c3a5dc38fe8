#include "wgplvm/wgd.hpp"

#include <random>

#include <Eigen/Eigenvalues>

#include "wgplvm/errors.hpp"
#include "wgplvm/linalg.hpp"

namespace wgplvm {

namespace {

constexpr double kPsdTol = 1e-10;

void check_psd(const Eigen::MatrixXd& cov, const char* what) {
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kPsdTol) {
    throw NumericalError(std::string(what) + ": covariance is not symmetric");
  }
  if (cov.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -kPsdTol) {
    throw NumericalError(std::string(what) + ": covariance is not positive semidefinite");
  }
}

}  // namespace

WrappedGaussian::WrappedGaussian(Manifold manifold, const Point& basepoint, Eigen::MatrixXd cov)
    : WrappedGaussian(manifold, manifold.tangent_basis(basepoint), std::move(cov)) {}

WrappedGaussian::WrappedGaussian(Manifold manifold, TangentFrame frame, Eigen::MatrixXd cov)
    : manifold_(std::move(manifold)), frame_(std::move(frame)), cov_(std::move(cov)) {
  if (cov_.rows() != manifold_.intrinsic_dim() || cov_.cols() != manifold_.intrinsic_dim()) {
    throw DimensionError("wrapped gaussian: covariance must be intrinsic_dim x intrinsic_dim");
  }
  if (frame_.intrinsic_dim() != manifold_.intrinsic_dim() || frame_.ambient_dim() != manifold_.ambient_dim()) {
    throw DimensionError("wrapped gaussian: frame does not match the manifold");
  }
  check_psd(cov_, "wrapped gaussian");
}

JointWrappedGaussian::JointWrappedGaussian(WrappedGaussian first, WrappedGaussian second,
                                           Eigen::MatrixXd cross_cov)
    : first_(std::move(first)), second_(std::move(second)), cross_cov_(std::move(cross_cov)) {
  if (cross_cov_.rows() != first_.dim() || cross_cov_.cols() != second_.dim()) {
    throw DimensionError("joint wrapped gaussian: cross covariance must be dim1 x dim2");
  }
  check_psd(block_cov(), "joint wrapped gaussian");
}

Eigen::MatrixXd JointWrappedGaussian::block_cov() const {
  const int d1 = first_.dim();
  const int d2 = second_.dim();
  Eigen::MatrixXd k(d1 + d2, d1 + d2);
  k.topLeftCorner(d1, d1) = first_.cov();
  k.topRightCorner(d1, d2) = cross_cov_;
  k.bottomLeftCorner(d2, d1) = cross_cov_.transpose();
  k.bottomRightCorner(d2, d2) = second_.cov();
  return k;
}

WrappedGaussian JointWrappedGaussian::as_product() const {
  Manifold m = Manifold::product({first_.manifold(), second_.manifold()});
  Eigen::VectorXd base(m.ambient_dim());
  base << first_.basepoint().coords, second_.basepoint().coords;
  Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(m.ambient_dim(), m.intrinsic_dim());
  axes.topLeftCorner(first_.frame().ambient_dim(), first_.dim()) = first_.frame().axes();
  axes.bottomRightCorner(second_.frame().ambient_dim(), second_.dim()) = second_.frame().axes();
  return WrappedGaussian(m, TangentFrame(Point{base}, axes), block_cov());
}

std::vector<Point> sample(const WrappedGaussian& w, std::uint64_t seed, std::size_t count) {
  const JitteredCholesky chol = robust_cholesky(w.cov());
  const Eigen::MatrixXd l = chol.lower();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count);
  Eigen::VectorXd z(w.dim());
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < w.dim(); ++k) z(k) = normal(rng);
    out.push_back(w.manifold().exp(w.frame().from_intrinsic(l * z)));
  }
  return out;
}

LogDensity log_density_approx(const WrappedGaussian& w, const Point& p) {
  const Eigen::VectorXd y = w.frame().to_intrinsic(w.manifold().log(w.basepoint(), p));
  const JitteredCholesky chol = robust_cholesky(w.cov());
  const Eigen::VectorXd white = chol.llt.matrixL().solve(y);
  LogDensity out;
  out.jitter = chol.jitter;
  out.value = -0.5 * w.dim() * kLog2Pi - 0.5 * chol.log_det() - 0.5 * white.squaredNorm();
  return out;
}

WrappedGaussian condition(const JointWrappedGaussian& j, const Point& observed) {
  const WrappedGaussian& w1 = j.first();
  const WrappedGaussian& w2 = j.second();
  const Eigen::VectorXd v = w2.frame().to_intrinsic(w2.manifold().log(w2.basepoint(), observed));

  const JitteredCholesky chol2 = robust_cholesky(w2.cov());
  const Eigen::MatrixXd& k12 = j.cross_cov();
  const Eigen::VectorXd mean = k12 * chol2.solve(v);
  Eigen::MatrixXd cov = w1.cov() - k12 * chol2.solve(k12.transpose());
  cov = 0.5 * (cov + cov.transpose());

  const Point base = w1.manifold().exp(w1.frame().from_intrinsic(mean));
  if (base.coords == w1.basepoint().coords) return WrappedGaussian(w1.manifold(), w1.frame(), cov);

  TangentFrame frame = w1.manifold().tangent_basis(base);
  const Eigen::MatrixXd transfer = frame.axes().transpose() * w1.frame().axes();
  Eigen::MatrixXd moved = transfer * cov * transfer.transpose();
  moved = 0.5 * (moved + moved.transpose());
  return WrappedGaussian(w1.manifold(), std::move(frame), std::move(moved));
}

}  // namespace wgplvm
