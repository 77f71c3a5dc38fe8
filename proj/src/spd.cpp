#include "wgplvm/spd.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wgplvm/errors.hpp"

namespace wgplvm::spd {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogEigenFloor = 1e-12;

Eigen::MatrixXd apply_spectral(const Eigen::MatrixXd& sym, double (*fn)(double)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("spd: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues().unaryExpr(fn);
  Eigen::MatrixXd out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

int coord_dim(int n) { return n * (n + 1) / 2; }

int matrix_dim(int len) {
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (n < 1 || coord_dim(n) != len) {
    throw DimensionError("spd: " + std::to_string(len) + " is not a triangular number");
  }
  return n;
}

Eigen::MatrixXd to_matrix(const Eigen::VectorXd& coords) {
  const int n = matrix_dim(static_cast<int>(coords.size()));
  Eigen::MatrixXd m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    m(i, i) = coords(k++);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = m(j, i) = coords(k++) / kSqrt2;
    }
  }
  return m;
}

Eigen::VectorXd to_coords(const Eigen::MatrixXd& sym) {
  const int n = static_cast<int>(sym.rows());
  Eigen::VectorXd coords(coord_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    coords(k++) = sym(i, i);
    for (int j = i + 1; j < n; ++j) coords(k++) = kSqrt2 * 0.5 * (sym(i, j) + sym(j, i));
  }
  return coords;
}

Eigen::MatrixXd from_upper_unscaled(const Eigen::VectorXd& upper, int n) {
  if (upper.size() != coord_dim(n)) throw DimensionError("spd: wrong number of upper-triangle entries");
  Eigen::MatrixXd m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      m(i, j) = m(j, i) = upper(k++);
    }
  }
  return m;
}

Eigen::VectorXd to_upper_unscaled(const Eigen::MatrixXd& sym) {
  const int n = static_cast<int>(sym.rows());
  Eigen::VectorXd out(coord_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out(k++) = sym(i, j);
  }
  return out;
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("spd: eigendecomposition failed");
  return eig.eigenvalues();
}

double min_eigenvalue(const Eigen::MatrixXd& sym) { return eigenvalues(sym).minCoeff(); }

Eigen::MatrixXd log_matrix(const Eigen::MatrixXd& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
  if (eig.info() != Eigen::Success) throw NumericalError("spd: eigendecomposition failed");
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > kLogEigenFloor)) {
    std::ostringstream msg;
    msg << "spd: matrix is not positive definite (minimum eigenvalue " << lo << ")";
    throw InvalidPointError(msg.str());
  }
  Eigen::VectorXd logs = eig.eigenvalues().array().log();
  Eigen::MatrixXd out = eig.eigenvectors() * logs.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd exp_matrix(const Eigen::MatrixXd& s) {
  return apply_spectral(s, [](double x) { return std::exp(x); });
}

}  // namespace wgplvm::spd
