#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "support.hpp"
#include "wgplvm/errors.hpp"
#include "wgplvm/wgd.hpp"

namespace wgplvm {
namespace {

using std::numbers::pi;

Point angle_point(double theta) { return Point{Eigen::Vector2d(std::cos(theta), std::sin(theta))}; }

// Independent multivariate normal log-density.
double mvn_log_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov) {
  const double d = static_cast<double>(x.size());
  return -0.5 * (d * std::log(2.0 * pi) + std::log(cov.determinant()) + x.dot(cov.inverse() * x));
}

// log sum_{|k| <= 10} N(theta + 2 pi k | 0, sigma^2), by log-sum-exp.
double wrapped_normal_series(double theta, double sigma) {
  std::vector<double> terms;
  for (int k = -10; k <= 10; ++k) {
    const double t = theta + 2.0 * pi * k;
    terms.push_back(-0.5 * t * t / (sigma * sigma) - std::log(sigma * std::sqrt(2.0 * pi)));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

TEST(WrappedGaussianTest, RejectsInvalidCovariance) {
  const Manifold s2 = Manifold::sphere(2);
  const Point north{Eigen::Vector3d(0, 0, 1)};
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(WrappedGaussian(s2, north, asym), NumericalError);
  EXPECT_THROW(WrappedGaussian(s2, north, Eigen::Vector2d(1, -0.1).asDiagonal()), NumericalError);
  EXPECT_THROW(WrappedGaussian(s2, north, Eigen::Matrix3d::Identity()), DimensionError);
  EXPECT_NO_THROW(WrappedGaussian(s2, north, Eigen::Vector2d(1, -1e-12).asDiagonal()));
}

TEST(SampleTest, DegenerateCovarianceConcentratesAtBasepoint) {
  const Manifold m = Manifold::spd(3);
  std::mt19937_64 rng(1);
  const Point mu = testing::random_point(m, rng);
  const WrappedGaussian w(m, mu, 1e-20 * Eigen::MatrixXd::Identity(6, 6));
  for (const Point& p : sample(w, 7, 100)) EXPECT_LT(m.distance(p, mu), 1e-8);
}

TEST(SampleTest, SphereSamplesStayOnSphere) {
  const Manifold s2 = Manifold::sphere(2);
  const WrappedGaussian w(s2, Point{Eigen::Vector3d(0, 0, 1)}, Eigen::Matrix2d::Identity() * 4.0);
  for (const Point& p : sample(w, 3, 10000)) ASSERT_NEAR(p.coords.norm(), 1.0, 1e-9);
}

TEST(SampleTest, EuclideanSampleCovarianceMatches) {
  const Manifold m = Manifold::euclidean(2);
  const Eigen::Matrix2d k = Eigen::Vector2d(1, 4).asDiagonal();
  const std::vector<Point> draws = sample(WrappedGaussian(m, Point{Eigen::Vector2d::Zero()}, k), 11, 100000);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const Point& p : draws) mean += p.coords / draws.size();
  for (const Point& p : draws) cov += (p.coords - mean) * (p.coords - mean).transpose() / (draws.size() - 1.0);
  EXPECT_NEAR(cov(0, 0), 1.0, 0.05);
  EXPECT_NEAR(cov(1, 1), 4.0, 0.2);
  EXPECT_NEAR(cov(0, 1), 0.0, 0.05 * 2.0);
}

TEST(SampleTest, DeterministicPerSeed) {
  const WrappedGaussian w(Manifold::kendall2d(5), Manifold::kendall2d(5).project(Eigen::VectorXd::LinSpaced(10, 0, 1)),
                          0.01 * Eigen::MatrixXd::Identity(6, 6));
  const auto a = sample(w, 42, 20);
  const auto b = sample(w, 42, 20);
  const auto c = sample(w, 43, 20);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords, b[i].coords);
  EXPECT_NE(a[0].coords, c[0].coords);
}

TEST(LogDensityTest, EuclideanIsMultivariateNormal) {
  std::mt19937_64 rng(5);
  const Manifold m = Manifold::euclidean(3);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd k = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(3, 3);
  const Point mu{testing::normal_vector(rng, 3)};
  const WrappedGaussian w(m, mu, k);
  for (int t = 0; t < 10; ++t) {
    const Point p{testing::normal_vector(rng, 3)};
    const LogDensity ld = log_density_approx(w, p);
    EXPECT_NEAR(ld.value, mvn_log_density(p.coords - mu.coords, k), 1e-10);
    EXPECT_FALSE(ld.jittered());
  }
}

TEST(LogDensityTest, AtBasepoint) {
  const Manifold s2 = Manifold::sphere(2);
  const Eigen::Matrix2d k = Eigen::Vector2d(0.3, 0.7).asDiagonal();
  const Point mu{Eigen::Vector3d(0, 1, 0)};
  EXPECT_NEAR(log_density_approx(WrappedGaussian(s2, mu, k), mu).value,
              -std::log(2.0 * pi) - 0.5 * std::log(0.21), 1e-12);
}

TEST(LogDensityTest, SingularCovarianceIsJitteredAndFlagged) {
  const Manifold m = Manifold::euclidean(2);
  const WrappedGaussian w(m, Point{Eigen::Vector2d::Zero()}, Eigen::Vector2d(1.0, 0.0).asDiagonal());
  const LogDensity ld = log_density_approx(w, Point{Eigen::Vector2d(0.1, 0.0)});
  EXPECT_TRUE(ld.jittered());
  EXPECT_TRUE(std::isfinite(ld.value));
}

TEST(LogDensityTest, CircleMatchesWrappedNormalSeries) {
  const Manifold circle = Manifold::sphere(1);
  const Point mu = angle_point(0.0);
  for (double sigma : {0.05, 0.1, 0.25, 0.5}) {
    const WrappedGaussian w(circle, mu, Eigen::MatrixXd::Constant(1, 1, sigma * sigma));
    for (int i = -200; i <= 200; ++i) {
      const double theta = (pi - 1e-3) * i / 200.0;
      const double approx = log_density_approx(w, angle_point(theta)).value;
      const double series = wrapped_normal_series(theta, sigma);
      // Lower bound everywhere; agreement where the other wraps are negligible.
      EXPECT_LE(approx, series + 1e-12);
      if (std::abs(theta) <= std::min(4.0 * sigma, pi)) {
        EXPECT_NEAR(approx, series, 1e-6) << sigma << " " << theta;
      }
    }
  }
}

TEST(LogDensityTest, AntipodeIsCutLocus) {
  const WrappedGaussian w(Manifold::sphere(1), angle_point(0.0), Eigen::MatrixXd::Identity(1, 1));
  EXPECT_THROW(log_density_approx(w, angle_point(pi)), CutLocusError);
}

TEST(ConditionTest, EuclideanScalarExample) {
  const Manifold r1 = Manifold::euclidean(1);
  const Point zero{Eigen::VectorXd::Zero(1)};
  const JointWrappedGaussian j(WrappedGaussian(r1, zero, Eigen::MatrixXd::Constant(1, 1, 2.0)),
                               WrappedGaussian(r1, zero, Eigen::MatrixXd::Constant(1, 1, 2.0)),
                               Eigen::MatrixXd::Constant(1, 1, 1.0));
  const WrappedGaussian c = condition(j, Point{Eigen::VectorXd::Constant(1, 1.0)});
  EXPECT_NEAR(c.basepoint().coords(0), 0.5, 1e-15);
  EXPECT_NEAR(c.cov()(0, 0), 1.5, 1e-15);
}

TEST(ConditionTest, EuclideanMatchesTextbookConditioning) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int d1 = 1 + trial % 3;
    const int d2 = 1 + (trial / 3) % 3;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(d1 + d2, d1 + d2);
    const Eigen::MatrixXd k = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d1 + d2, d1 + d2);
    const Point mu1{testing::normal_vector(rng, d1)};
    const Point mu2{testing::normal_vector(rng, d2)};
    const Point obs{testing::normal_vector(rng, d2)};
    const JointWrappedGaussian j(WrappedGaussian(Manifold::euclidean(d1), mu1, k.topLeftCorner(d1, d1)),
                                 WrappedGaussian(Manifold::euclidean(d2), mu2, k.bottomRightCorner(d2, d2)),
                                 k.topRightCorner(d1, d2));
    const WrappedGaussian c = condition(j, obs);
    const Eigen::MatrixXd k22_inv = k.bottomRightCorner(d2, d2).inverse();
    const Eigen::VectorXd mean = mu1.coords + k.topRightCorner(d1, d2) * k22_inv * (obs.coords - mu2.coords);
    const Eigen::MatrixXd cov =
        k.topLeftCorner(d1, d1) - k.topRightCorner(d1, d2) * k22_inv * k.bottomLeftCorner(d2, d1);
    EXPECT_LT((c.basepoint().coords - mean).norm(), 1e-10);
    EXPECT_LT((c.cov() - cov).norm(), 1e-10);
  }
}

TEST(ConditionTest, IndependenceLeavesMarginal) {
  const Manifold s2 = Manifold::sphere(2);
  const Point mu1{Eigen::Vector3d(0, 0, 1)};
  const Point mu2{Eigen::Vector3d(1, 0, 0)};
  Eigen::Matrix2d k1;
  k1 << 0.3, 0.1, 0.1, 0.2;
  const JointWrappedGaussian j(WrappedGaussian(s2, mu1, k1), WrappedGaussian(s2, mu2, Eigen::Matrix2d::Identity()),
                               Eigen::Matrix2d::Zero());
  const WrappedGaussian c = condition(j, Point{Eigen::Vector3d(0.6, 0.8, 0)});
  EXPECT_LT((c.basepoint().coords - mu1.coords).norm(), 1e-15);
  EXPECT_LT((c.cov() - k1).norm(), 1e-15);
}

TEST(ConditionTest, JointRejectsNonPsdBlock) {
  const Manifold r1 = Manifold::euclidean(1);
  const Point zero{Eigen::VectorXd::Zero(1)};
  const WrappedGaussian w(r1, zero, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_THROW(JointWrappedGaussian(w, w, Eigen::MatrixXd::Constant(1, 1, 2.0)), NumericalError);
}

TEST(ConditionTest, CircleProductMatchesRejectionSampling) {
  const Manifold circle = Manifold::sphere(1);
  const double s1 = 0.25, s2 = 0.3, rho = 0.7;
  const WrappedGaussian w1(circle, angle_point(0.4), Eigen::MatrixXd::Constant(1, 1, s1 * s1));
  const WrappedGaussian w2(circle, angle_point(-0.2), Eigen::MatrixXd::Constant(1, 1, s2 * s2));
  const JointWrappedGaussian j(w1, w2, Eigen::MatrixXd::Constant(1, 1, rho * s1 * s2));
  const double observed = -0.2 + 0.25;
  const WrappedGaussian c = condition(j, angle_point(observed));

  // Orientation of each frame relative to the counter-clockwise angle.
  const double e1 = w1.frame().axes()(1, 0) * std::cos(0.4) - w1.frame().axes()(0, 0) * std::sin(0.4);
  const double e2 = w2.frame().axes()(1, 0) * std::cos(-0.2) - w2.frame().axes()(0, 0) * std::sin(-0.2);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  const double window = 0.1 * s2;
  const int bins = 30;
  const double sd_c = s1 * std::sqrt(1.0 - rho * rho);
  const double centre = std::atan2(c.basepoint().coords(1), c.basepoint().coords(0));
  const double lo = centre - 4.0 * sd_c, hi = centre + 4.0 * sd_c;
  std::vector<double> counts(bins, 0.0);
  double accepted = 0.0;
  for (int i = 0; i < 3000000; ++i) {
    const double a = z(rng), b = z(rng);
    const double t1 = 0.4 + e1 * s1 * a;
    const double t2 = -0.2 + e2 * s2 * (rho * a + std::sqrt(1.0 - rho * rho) * b);
    if (std::abs(std::remainder(t2 - observed, 2.0 * pi)) > window) continue;
    accepted += 1.0;
    const double u = centre + std::remainder(t1 - centre, 2.0 * pi);
    if (u >= lo && u < hi) counts[static_cast<std::size_t>((u - lo) / (hi - lo) * bins)] += 1.0;
  }
  ASSERT_GT(accepted, 1e4);
  const double width = (hi - lo) / bins;
  double peak = 0.0, worst = 0.0;
  for (int b = 0; b < bins; ++b) {
    // Bin-averaged model density by Simpson's rule.
    const double x0 = lo + b * width;
    auto dens = [&](double t) { return std::exp(log_density_approx(c, angle_point(t)).value); };
    const double model = (dens(x0) + 4.0 * dens(x0 + 0.5 * width) + dens(x0 + width)) / 6.0;
    const double empirical = counts[static_cast<std::size_t>(b)] / (accepted * width);
    peak = std::max(peak, model);
    worst = std::max(worst, std::abs(model - empirical));
  }
  EXPECT_LT(worst / peak, 0.04);
}

}  // namespace
}  // namespace wgplvm
