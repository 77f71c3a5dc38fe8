#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wgplvm {

enum class ManifoldKind { Euclidean, Sphere, Kendall2D, SpdLogEuclidean, Product };

// A point in the canonical ambient coordinates of some manifold. Validity is
// a property checked against a Manifold, not enforced by the type.
struct Point {
  Eigen::VectorXd coords;
};

// A tangent vector in ambient coordinates, attached to its basepoint.
struct TangentVector {
  Point base;
  Eigen::VectorXd coords;
};

// Orthonormal basis of the tangent space at `base`, one ambient column per
// intrinsic direction.
class TangentFrame {
 public:
  TangentFrame() = default;
  TangentFrame(Point base, Eigen::MatrixXd axes) : base_(std::move(base)), axes_(std::move(axes)) {}

  const Point& base() const { return base_; }
  const Eigen::MatrixXd& axes() const { return axes_; }
  int intrinsic_dim() const { return static_cast<int>(axes_.cols()); }
  int ambient_dim() const { return static_cast<int>(axes_.rows()); }

  Eigen::VectorXd to_intrinsic(const TangentVector& v) const;
  Eigen::VectorXd to_intrinsic(const Eigen::VectorXd& ambient) const;
  TangentVector from_intrinsic(const Eigen::VectorXd& coords) const;

 private:
  Point base_;
  Eigen::MatrixXd axes_;
};

// Descriptor of one of the supported manifolds. All of them carry the flat
// ambient inner product on their tangent spaces in canonical coordinates
// (embedded metric for spheres and pre-shapes, Frobenius metric after the
// matrix-log chart for SPD), so norms of tangent coordinates are metric norms.
//
// Layouts:
//   Euclidean(n)        coords in R^n
//   Sphere(n)           unit vector in R^(n+1)
//   Kendall2D(k)        x1,y1,...,xk,yk centered and unit-norm; rotations quotiented
//   SpdLogEuclidean(n)  scaled upper triangle, see spd.hpp
//   Product(...)        concatenation of factor coordinates
class Manifold {
 public:
  static Manifold euclidean(int n);
  static Manifold sphere(int n);
  static Manifold kendall2d(int landmarks);
  static Manifold spd(int n);
  static Manifold product(std::vector<Manifold> factors);

  ManifoldKind kind() const { return kind_; }
  // n for Euclidean/Sphere/SPD, landmark count for Kendall2D, 0 for products.
  int parameter() const { return param_; }
  const std::vector<Manifold>& factors() const { return factors_; }

  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  std::string name() const;

  bool contains(const Eigen::VectorXd& coords, double tol = 1e-9) const;
  // Throws DimensionError / InvalidPointError.
  void check_point(const Point& p) const;

  Eigen::VectorXd project_to_tangent(const Point& p, const Eigen::VectorXd& v) const;
  bool is_tangent(const TangentVector& v, double tol = 1e-9) const;

  Point exp(const TangentVector& v) const;
  Point exp(const Point& p, const Eigen::VectorXd& v) const { return exp(TangentVector{p, v}); }
  // Minimal-norm logarithm. Throws CutLocusError when it is not unique.
  TangentVector log(const Point& p, const Point& q) const;
  // Geodesic distance; defined (pi, pi/2) on sphere/Kendall cut loci.
  double distance(const Point& p, const Point& q) const;
  double inner(const Point& p, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double norm(const TangentVector& v) const;

  TangentFrame tangent_basis(const Point& p) const;

  // Nearest point on the manifold for an arbitrary ambient vector.
  Point project(const Eigen::VectorXd& ambient) const;

  bool operator==(const Manifold& other) const;

 private:
  Manifold(ManifoldKind kind, int param, std::vector<Manifold> factors);

  Eigen::VectorXd exp_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const;
  Eigen::VectorXd log_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;
  double distance_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;
  Eigen::VectorXd tangent_projection_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const;
  Eigen::MatrixXd basis_raw(const Eigen::VectorXd& p) const;
  Eigen::VectorXd project_raw(const Eigen::VectorXd& ambient) const;
  bool contains_raw(const Eigen::VectorXd& coords, double tol) const;

  ManifoldKind kind_;
  int param_ = 0;
  std::vector<Manifold> factors_;
  int ambient_dim_ = 0;
  int intrinsic_dim_ = 0;
};

inline constexpr double kSpdEigenFloor = 1e-8;

struct FrechetOptions {
  double tol = 1e-10;
  int max_iter = 1000;
};

// Fixed point of mu <- Exp_mu(mean_i Log_mu(p_i)), started at the first point.
// Throws ConvergenceError carrying the last iterate.
Point frechet_mean(const Manifold& m, std::span<const Point> points, FrechetOptions options = {});

// Optimal planar rotation of `shape` onto `reference` (both x1,y1,... layout,
// centered). Rotations only, no reflections.
Eigen::VectorXd align_rotation(const Eigen::VectorXd& reference, const Eigen::VectorXd& shape);

}  // namespace wgplvm
