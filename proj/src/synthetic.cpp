#include "wgplvm/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wgplvm/errors.hpp"
#include "wgplvm/spd.hpp"

namespace wgplvm {

namespace {

std::string label(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

int count_param(const SyntheticParams& p, const std::string& key, int min) {
  const double v = p.at(key);
  if (v != std::floor(v) || v < min) {
    throw ConfigError(key + " must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

double nonnegative_param(const SyntheticParams& p, const std::string& key) {
  const double v = p.at(key);
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be finite and >= 0");
  return v;
}

Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n, double sigma) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sigma * normal(rng);
  return v;
}

SyntheticData sphere_circle(const SyntheticParams& p, std::uint64_t seed) {
  const int n = count_param(p, "n", 2);
  const double noise = nonnegative_param(p, "noise");
  const double radius = p.at("radius");
  if (!(radius > 0.0 && radius < std::numbers::pi)) throw ConfigError("radius must lie in (0, pi)");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const Manifold sphere = Manifold::sphere(2);
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    const double t = angle(rng);
    const Point on_circle{Eigen::Vector3d(std::sin(radius) * std::cos(t), std::sin(radius) * std::sin(t),
                                          std::cos(radius))};
    const Eigen::VectorXd z = normal_vector(rng, 2, noise);
    const TangentFrame frame = sphere.tangent_basis(on_circle);
    rows.push_back(sphere.exp(frame.from_intrinsic(z)).coords);
    labels.push_back(label(t));
  }
  std::ostringstream out;
  write_directions(out, rows, labels);
  return {"sphere_circle", out.str(), 3};
}

SyntheticData spd_geodesic(const SyntheticParams& p, std::uint64_t seed) {
  const int n = count_param(p, "n", 2);
  const int dim = count_param(p, "dim", 1);
  const double noise = nonnegative_param(p, "noise");
  const double span = nonnegative_param(p, "span");

  std::mt19937_64 rng(seed);
  const int coords = spd::coord_dim(dim);
  Eigen::VectorXd direction = normal_vector(rng, coords, 1.0);
  direction *= span / direction.norm();

  std::uniform_real_distribution<double> position(-1.0, 1.0);
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    const double t = position(rng);
    const Eigen::VectorXd log_coords = t * direction + normal_vector(rng, coords, noise);
    matrices.push_back(spd::exp_matrix(spd::to_matrix(log_coords)));
    labels.push_back(label(t));
  }
  std::ostringstream out;
  write_spd(out, matrices, labels);
  return {"spd_geodesic", out.str(), dim};
}

SyntheticData kendall_family(const SyntheticParams& p, std::uint64_t seed) {
  const int n = count_param(p, "n", 2);
  const int k = count_param(p, "landmarks", 3);
  const double noise = nonnegative_param(p, "noise");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    const double s = unit(rng);
    const double theta = angle(rng);
    const double c = scale(rng);
    const double dx = shift(rng);
    const double dy = shift(rng);
    const Eigen::VectorXd eps = normal_vector(rng, 2 * k, noise);
    Eigen::VectorXd shape(2 * k);
    for (int j = 0; j < k; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / k;
      const double x = std::cos(phi) * (1.0 + 0.3 * s) + eps(2 * j);
      const double y = std::sin(phi) * (1.0 - 0.3 * s) + 0.2 * s * s * std::cos(2.0 * phi) + eps(2 * j + 1);
      shape(2 * j) = c * (std::cos(theta) * x - std::sin(theta) * y) + dx;
      shape(2 * j + 1) = c * (std::sin(theta) * x + std::cos(theta) * y) + dy;
    }
    rows.push_back(shape);
    labels.push_back(label(s));
  }
  std::ostringstream out;
  write_landmarks(out, rows, labels);
  return {"kendall_family", out.str(), k};
}

}  // namespace

Dataset SyntheticData::load() const {
  std::istringstream in(csv);
  Dataset d;
  if (kind == "sphere_circle") {
    d = read_directions(in, "synthetic " + kind);
  } else if (kind == "spd_geodesic") {
    d = read_spd(in, size, "synthetic " + kind);
  } else if (kind == "kendall_family") {
    d = read_landmarks(in, 0, "synthetic " + kind);
  } else {
    throw ConfigError("unknown synthetic kind '" + kind + "'");
  }
  d.label_name = "t";
  return d;
}

const std::vector<std::string>& synthetic_kinds() {
  static const std::vector<std::string> kinds{"sphere_circle", "spd_geodesic", "kendall_family"};
  return kinds;
}

SyntheticParams synthetic_params(const std::string& kind, const SyntheticParams& params) {
  SyntheticParams out;
  if (kind == "sphere_circle") {
    out = {{"n", 100}, {"noise", 0.05}, {"radius", 1.0}};
  } else if (kind == "spd_geodesic") {
    out = {{"n", 120}, {"dim", 3}, {"noise", 0.1}, {"span", 2.0}};
  } else if (kind == "kendall_family") {
    out = {{"n", 60}, {"landmarks", 8}, {"noise", 0.02}};
  } else {
    throw ConfigError("unknown synthetic kind '" + kind + "'");
  }
  for (const auto& [key, value] : params) {
    if (!out.contains(key)) throw ConfigError("unknown parameter '" + key + "' for " + kind);
    out[key] = value;
  }
  return out;
}

SyntheticData synthesize(const std::string& kind, const SyntheticParams& params, std::uint64_t seed) {
  const SyntheticParams p = synthetic_params(kind, params);
  if (kind == "sphere_circle") return sphere_circle(p, seed);
  if (kind == "spd_geodesic") return spd_geodesic(p, seed);
  return kendall_family(p, seed);
}

}  // namespace wgplvm
