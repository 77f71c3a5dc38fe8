#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace wgplvm {

// Cholesky factor of a + jitter*I. `jitter` is the smallest rung of the ladder
// {0, 1e-12, 1e-10, 1e-8, 1e-6} at which the factorization succeeded.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  bool jittered() const { return jitter > 0.0; }
  double log_det() const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt.solve(rhs); }
  Eigen::MatrixXd lower() const { return llt.matrixL(); }
};

// Throws NumericalError when every rung fails.
JitteredCholesky robust_cholesky(const Eigen::MatrixXd& a);

inline constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace wgplvm
