#include "wgplvm/linalg.hpp"

#include <array>
#include <cmath>

#include "wgplvm/errors.hpp"

namespace wgplvm {

double JitteredCholesky::log_det() const {
  const Eigen::MatrixXd& l = llt.matrixLLT();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) sum += std::log(l(i, i));
  return 2.0 * sum;
}

JitteredCholesky robust_cholesky(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix is not square");
  if (!a.allFinite()) throw NumericalError("cholesky: non-finite matrix entries");
  static constexpr std::array<double, 5> kLadder = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};
  const auto n = a.rows();
  for (double jitter : kLadder) {
    JitteredCholesky out;
    out.jitter = jitter;
    if (jitter == 0.0) {
      out.llt.compute(a);
    } else {
      out.llt.compute(a + jitter * Eigen::MatrixXd::Identity(n, n));
    }
    if (out.llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd diag = out.llt.matrixLLT().diagonal();
    if ((diag.array() > 0.0).all() && diag.allFinite()) return out;
  }
  throw NumericalError("cholesky failed after jitter 1e-6");
}

}  // namespace wgplvm
