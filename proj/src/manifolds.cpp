#include "wgplvm/manifolds.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wgplvm/errors.hpp"
#include "wgplvm/spd.hpp"

namespace wgplvm {

namespace {

constexpr double kSmallAngle = 1e-7;
// Perpendicular residual below which q is treated as +/- p on the sphere.
constexpr double kCutLocusResidual = 1e-12;
constexpr double kFrameDropThreshold = 1e-6;

Eigen::VectorXd sphere_exp(const Eigen::VectorXd& p, const Eigen::VectorXd& v) {
  const double t = v.norm();
  if (t == 0.0) return p;
  Eigen::VectorXd q;
  if (t < kSmallAngle) {
    q = (1.0 - 0.5 * t * t) * p + (1.0 - t * t / 6.0) * v;
  } else {
    q = std::cos(t) * p + (std::sin(t) / t) * v;
  }
  return q / q.norm();
}

Eigen::VectorXd sphere_log(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const double c = p.dot(q);
  Eigen::VectorXd perp = q - c * p;
  const double s = perp.norm();
  if (s < kCutLocusResidual) {
    if (c < 0.0) throw CutLocusError("sphere log: antipodal points have no unique minimal geodesic");
    return Eigen::VectorXd::Zero(p.size());
  }
  const double angle = std::atan2(s, c);
  if (angle < kSmallAngle) return perp * (1.0 + angle * angle / 6.0);
  return perp * (angle / s);
}

double sphere_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const double c = p.dot(q);
  return std::atan2((q - c * p).norm(), c);
}

// Rotation generator (x, y) -> (-y, x) applied landmark-wise.
Eigen::VectorXd rotate_quarter(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
    out(i) = -x(i + 1);
    out(i + 1) = x(i);
  }
  return out;
}

Eigen::VectorXd rotate(const Eigen::VectorXd& x, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
    out(i) = c * x(i) - s * x(i + 1);
    out(i + 1) = s * x(i) + c * x(i + 1);
  }
  return out;
}

// Real and imaginary parts of the complex inner product <p, q>.
std::pair<double, double> complex_inner(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double a = 0.0;
  double b = 0.0;
  for (Eigen::Index i = 0; i + 1 < p.size(); i += 2) {
    a += p(i) * q(i) + p(i + 1) * q(i + 1);
    b += p(i) * q(i + 1) - p(i + 1) * q(i);
  }
  return {a, b};
}

Eigen::VectorXd center_landmarks(const Eigen::VectorXd& x) {
  const Eigen::Index k = x.size() / 2;
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    mx += x(2 * i);
    my += x(2 * i + 1);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  Eigen::VectorXd out = x;
  for (Eigen::Index i = 0; i < k; ++i) {
    out(2 * i) -= mx;
    out(2 * i + 1) -= my;
  }
  return out;
}

double centroid_norm(const Eigen::VectorXd& x) {
  const Eigen::Index k = x.size() / 2;
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    mx += x(2 * i);
    my += x(2 * i + 1);
  }
  return std::hypot(mx, my) / static_cast<double>(k);
}

Eigen::VectorXd kendall_horizontal(const Eigen::VectorXd& p, const Eigen::VectorXd& v) {
  Eigen::VectorXd h = center_landmarks(v);
  const Eigen::VectorXd jp = rotate_quarter(p);
  h -= h.dot(p) * p;
  h -= h.dot(jp) * jp;
  return h;
}

Eigen::MatrixXd gram_schmidt_frame(int ambient, int intrinsic,
                                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project) {
  Eigen::MatrixXd axes(ambient, intrinsic);
  int found = 0;
  for (int k = 0; k < ambient && found < intrinsic; ++k) {
    Eigen::VectorXd u = project(Eigen::VectorXd::Unit(ambient, k));
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < found; ++j) u -= axes.col(j).dot(u) * axes.col(j);
    }
    const double len = u.norm();
    if (len < kFrameDropThreshold) continue;
    axes.col(found++) = u / len;
  }
  if (found != intrinsic) throw NumericalError("tangent_basis: could not complete the frame");
  return axes;
}

template <typename Fn>
void for_each_factor(const std::vector<Manifold>& factors, Fn&& fn) {
  Eigen::Index offset = 0;
  for (const Manifold& f : factors) {
    fn(f, offset);
    offset += f.ambient_dim();
  }
}

}  // namespace

Eigen::VectorXd TangentFrame::to_intrinsic(const TangentVector& v) const { return to_intrinsic(v.coords); }

Eigen::VectorXd TangentFrame::to_intrinsic(const Eigen::VectorXd& ambient) const {
  if (ambient.size() != axes_.rows()) throw DimensionError("to_intrinsic: ambient dimension mismatch");
  return axes_.transpose() * ambient;
}

TangentVector TangentFrame::from_intrinsic(const Eigen::VectorXd& coords) const {
  if (coords.size() != axes_.cols()) throw DimensionError("from_intrinsic: intrinsic dimension mismatch");
  return TangentVector{base_, axes_ * coords};
}

Manifold::Manifold(ManifoldKind kind, int param, std::vector<Manifold> factors)
    : kind_(kind), param_(param), factors_(std::move(factors)) {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      ambient_dim_ = intrinsic_dim_ = param_;
      break;
    case ManifoldKind::Sphere:
      ambient_dim_ = param_ + 1;
      intrinsic_dim_ = param_;
      break;
    case ManifoldKind::Kendall2D:
      ambient_dim_ = 2 * param_;
      intrinsic_dim_ = 2 * param_ - 4;
      break;
    case ManifoldKind::SpdLogEuclidean:
      ambient_dim_ = intrinsic_dim_ = spd::coord_dim(param_);
      break;
    case ManifoldKind::Product:
      for (const Manifold& f : factors_) {
        ambient_dim_ += f.ambient_dim_;
        intrinsic_dim_ += f.intrinsic_dim_;
      }
      break;
  }
}

Manifold Manifold::euclidean(int n) {
  if (n < 1) throw DimensionError("Euclidean(n) needs n >= 1");
  return Manifold(ManifoldKind::Euclidean, n, {});
}

Manifold Manifold::sphere(int n) {
  if (n < 1) throw DimensionError("Sphere(n) needs n >= 1");
  return Manifold(ManifoldKind::Sphere, n, {});
}

Manifold Manifold::kendall2d(int landmarks) {
  if (landmarks < 3) throw DimensionError("Kendall2D needs at least 3 landmarks");
  return Manifold(ManifoldKind::Kendall2D, landmarks, {});
}

Manifold Manifold::spd(int n) {
  if (n < 1) throw DimensionError("SPD(n) needs n >= 1");
  return Manifold(ManifoldKind::SpdLogEuclidean, n, {});
}

Manifold Manifold::product(std::vector<Manifold> factors) {
  if (factors.empty()) throw DimensionError("product manifold needs at least one factor");
  return Manifold(ManifoldKind::Product, 0, std::move(factors));
}

std::string Manifold::name() const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return "Euclidean(" + std::to_string(param_) + ")";
    case ManifoldKind::Sphere:
      return "Sphere(" + std::to_string(param_) + ")";
    case ManifoldKind::Kendall2D:
      return "Kendall2D(" + std::to_string(param_) + ")";
    case ManifoldKind::SpdLogEuclidean:
      return "SpdLogEuclidean(" + std::to_string(param_) + ")";
    case ManifoldKind::Product: {
      std::string out = "Product(";
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i > 0) out += ",";
        out += factors_[i].name();
      }
      return out + ")";
    }
  }
  return {};
}

bool Manifold::operator==(const Manifold& other) const {
  return kind_ == other.kind_ && param_ == other.param_ && factors_ == other.factors_;
}

bool Manifold::contains_raw(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != ambient_dim_ || !x.allFinite()) return false;
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere:
      return std::abs(x.norm() - 1.0) <= tol;
    case ManifoldKind::Kendall2D:
      return std::abs(x.norm() - 1.0) <= tol && centroid_norm(x) <= tol;
    case ManifoldKind::SpdLogEuclidean:
      return spd::min_eigenvalue(spd::to_matrix(x)) > 0.0;
    case ManifoldKind::Product: {
      bool ok = true;
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        ok = ok && f.contains_raw(x.segment(off, f.ambient_dim()), tol);
      });
      return ok;
    }
  }
  return false;
}

bool Manifold::contains(const Eigen::VectorXd& coords, double tol) const { return contains_raw(coords, tol); }

void Manifold::check_point(const Point& p) const {
  if (p.coords.size() != ambient_dim_) {
    std::ostringstream msg;
    msg << name() << ": expected " << ambient_dim_ << " coordinates, got " << p.coords.size();
    throw DimensionError(msg.str());
  }
  if (!contains_raw(p.coords, 1e-9)) throw InvalidPointError(name() + ": point violates the manifold constraints");
}

Eigen::VectorXd Manifold::tangent_projection_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::SpdLogEuclidean:
      return v;
    case ManifoldKind::Sphere:
      return v - v.dot(p) * p;
    case ManifoldKind::Kendall2D:
      return kendall_horizontal(p, v);
    case ManifoldKind::Product: {
      Eigen::VectorXd out(v.size());
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.tangent_projection_raw(p.segment(off, n), v.segment(off, n));
      });
      return out;
    }
  }
  return v;
}

Eigen::VectorXd Manifold::project_to_tangent(const Point& p, const Eigen::VectorXd& v) const {
  if (p.coords.size() != ambient_dim_ || v.size() != ambient_dim_) {
    throw DimensionError(name() + ": tangent dimension mismatch");
  }
  return tangent_projection_raw(p.coords, v);
}

bool Manifold::is_tangent(const TangentVector& v, double tol) const {
  if (v.coords.size() != ambient_dim_ || v.base.coords.size() != ambient_dim_) return false;
  return (v.coords - tangent_projection_raw(v.base.coords, v.coords)).norm() <= tol;
}

Eigen::VectorXd Manifold::exp_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return p + v;
    case ManifoldKind::Sphere:
      return sphere_exp(p, v - v.dot(p) * p);
    case ManifoldKind::Kendall2D: {
      Eigen::VectorXd q = center_landmarks(sphere_exp(p, kendall_horizontal(p, v)));
      return q / q.norm();
    }
    case ManifoldKind::SpdLogEuclidean: {
      const Eigen::MatrixXd log_p = spd::log_matrix(spd::to_matrix(p));
      return spd::to_coords(spd::exp_matrix(log_p + spd::to_matrix(v)));
    }
    case ManifoldKind::Product: {
      Eigen::VectorXd out(p.size());
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.exp_raw(p.segment(off, n), v.segment(off, n));
      });
      return out;
    }
  }
  return p;
}

Eigen::VectorXd Manifold::log_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return q - p;
    case ManifoldKind::Sphere:
      return sphere_log(p, q);
    case ManifoldKind::Kendall2D: {
      const auto [a, b] = complex_inner(p, q);
      if (std::hypot(a, b) < kCutLocusResidual) {
        throw CutLocusError("kendall log: optimal rotation is not unique");
      }
      const Eigen::VectorXd aligned = rotate(q, -std::atan2(b, a));
      return kendall_horizontal(p, sphere_log(p, aligned));
    }
    case ManifoldKind::SpdLogEuclidean:
      return spd::to_coords(spd::log_matrix(spd::to_matrix(q))) -
             spd::to_coords(spd::log_matrix(spd::to_matrix(p)));
    case ManifoldKind::Product: {
      Eigen::VectorXd out(p.size());
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        const auto n = f.ambient_dim();
        out.segment(off, n) = f.log_raw(p.segment(off, n), q.segment(off, n));
      });
      return out;
    }
  }
  return q - p;
}

double Manifold::distance_raw(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return (q - p).norm();
    case ManifoldKind::Sphere:
      return sphere_distance(p, q);
    case ManifoldKind::Kendall2D: {
      const auto [a, b] = complex_inner(p, q);
      const double r = std::hypot(a, b);
      if (r < kCutLocusResidual) return std::numbers::pi / 2.0;
      return sphere_distance(p, rotate(q, -std::atan2(b, a)));
    }
    case ManifoldKind::SpdLogEuclidean:
      return log_raw(p, q).norm();
    case ManifoldKind::Product: {
      double sq = 0.0;
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        const auto n = f.ambient_dim();
        const double d = f.distance_raw(p.segment(off, n), q.segment(off, n));
        sq += d * d;
      });
      return std::sqrt(sq);
    }
  }
  return 0.0;
}

Point Manifold::exp(const TangentVector& v) const {
  check_point(v.base);
  if (v.coords.size() != ambient_dim_) throw DimensionError(name() + ": tangent dimension mismatch");
  return Point{exp_raw(v.base.coords, v.coords)};
}

TangentVector Manifold::log(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  return TangentVector{p, log_raw(p.coords, q.coords)};
}

double Manifold::distance(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  return distance_raw(p.coords, q.coords);
}

double Manifold::inner(const Point& p, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  if (p.coords.size() != ambient_dim_ || u.size() != ambient_dim_ || v.size() != ambient_dim_) {
    throw DimensionError(name() + ": tangent dimension mismatch");
  }
  return u.dot(v);
}

double Manifold::norm(const TangentVector& v) const { return std::sqrt(inner(v.base, v.coords, v.coords)); }

Eigen::MatrixXd Manifold::basis_raw(const Eigen::VectorXd& p) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::SpdLogEuclidean:
      return Eigen::MatrixXd::Identity(ambient_dim_, intrinsic_dim_);
    case ManifoldKind::Sphere:
    case ManifoldKind::Kendall2D:
      return gram_schmidt_frame(ambient_dim_, intrinsic_dim_,
                                [&](const Eigen::VectorXd& v) { return tangent_projection_raw(p, v); });
    case ManifoldKind::Product: {
      Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(ambient_dim_, intrinsic_dim_);
      Eigen::Index col = 0;
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        axes.block(off, col, f.ambient_dim(), f.intrinsic_dim()) = f.basis_raw(p.segment(off, f.ambient_dim()));
        col += f.intrinsic_dim();
      });
      return axes;
    }
  }
  return {};
}

TangentFrame Manifold::tangent_basis(const Point& p) const {
  check_point(p);
  return TangentFrame(p, basis_raw(p.coords));
}

Eigen::VectorXd Manifold::project_raw(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return x;
    case ManifoldKind::Sphere: {
      const double n = x.norm();
      if (n == 0.0) throw InvalidPointError("sphere projection: zero vector has no nearest point");
      return x / n;
    }
    case ManifoldKind::Kendall2D: {
      Eigen::VectorXd c = center_landmarks(x);
      const double n = c.norm();
      if (n == 0.0) throw InvalidPointError("kendall projection: degenerate configuration");
      return c / n;
    }
    case ManifoldKind::SpdLogEuclidean: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spd::to_matrix(x));
      if (eig.info() != Eigen::Success) throw NumericalError("spd projection: eigendecomposition failed");
      const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(kSpdEigenFloor);
      const Eigen::MatrixXd m = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
      return spd::to_coords(m);
    }
    case ManifoldKind::Product: {
      Eigen::VectorXd out(x.size());
      for_each_factor(factors_, [&](const Manifold& f, Eigen::Index off) {
        out.segment(off, f.ambient_dim()) = f.project_raw(x.segment(off, f.ambient_dim()));
      });
      return out;
    }
  }
  return x;
}

Point Manifold::project(const Eigen::VectorXd& ambient) const {
  if (ambient.size() != ambient_dim_) throw DimensionError(name() + ": projection dimension mismatch");
  if (!ambient.allFinite()) throw InvalidPointError(name() + ": cannot project non-finite coordinates");
  return Point{project_raw(ambient)};
}

Point frechet_mean(const Manifold& m, std::span<const Point> points, FrechetOptions options) {
  if (points.empty()) throw DimensionError("frechet_mean: empty point set");
  for (const Point& p : points) m.check_point(p);
  const double inv_n = 1.0 / static_cast<double>(points.size());

  if (m.kind() == ManifoldKind::Euclidean) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m.ambient_dim());
    for (const Point& p : points) sum += p.coords;
    return Point{sum * inv_n};
  }

  Point mean = points.front();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    Eigen::VectorXd step = Eigen::VectorXd::Zero(m.ambient_dim());
    for (const Point& p : points) step += m.log(mean, p).coords;
    step *= inv_n;
    if (step.norm() < options.tol) return mean;
    mean = m.exp(mean, step);
  }
  throw ConvergenceError("frechet_mean: no convergence after " + std::to_string(options.max_iter) + " iterations",
                         mean.coords);
}

Eigen::VectorXd align_rotation(const Eigen::VectorXd& reference, const Eigen::VectorXd& shape) {
  if (reference.size() != shape.size() || reference.size() % 2 != 0) {
    throw DimensionError("align_rotation: landmark vectors differ in size");
  }
  const auto [a, b] = complex_inner(reference, shape);
  if (a == 0.0 && b == 0.0) return shape;
  return rotate(shape, -std::atan2(b, a));
}

}  // namespace wgplvm
