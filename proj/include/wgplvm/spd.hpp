#pragma once

#include <Eigen/Core>

// Symmetric-matrix helpers for the Log-Euclidean SPD manifold.
//
// Canonical coordinates flatten the upper triangle row by row,
// (0,0), (0,1), ..., (0,n-1), (1,1), ..., with off-diagonal entries
// multiplied by sqrt(2) so that the Euclidean norm of the coordinates equals
// the Frobenius norm of the matrix.
namespace wgplvm::spd {

int coord_dim(int n);

// Inverse of coord_dim; throws DimensionError when `len` is not triangular.
int matrix_dim(int len);

Eigen::MatrixXd to_matrix(const Eigen::VectorXd& coords);
Eigen::VectorXd to_coords(const Eigen::MatrixXd& sym);

// Same ordering without the sqrt(2) scaling (file format).
Eigen::MatrixXd from_upper_unscaled(const Eigen::VectorXd& upper, int n);
Eigen::VectorXd to_upper_unscaled(const Eigen::MatrixXd& sym);

// Matrix logarithm; throws InvalidPointError when an eigenvalue is <= 1e-12.
Eigen::MatrixXd log_matrix(const Eigen::MatrixXd& p);
Eigen::MatrixXd exp_matrix(const Eigen::MatrixXd& s);

double min_eigenvalue(const Eigen::MatrixXd& sym);
Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& sym);

}  // namespace wgplvm::spd
