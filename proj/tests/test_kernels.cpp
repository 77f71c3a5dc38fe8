#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "support.hpp"
#include "wgplvm/errors.hpp"
#include "wgplvm/kernels.hpp"

namespace wgplvm {
namespace {

using std::numbers::pi;

KernelSpec spec(KernelFamily f, double sig, double ell2, double noise) {
  return KernelSpec{f, std::log(sig), std::log(ell2), std::log(noise)};
}

double& hyper(KernelSpec& k, int h) {
  return h == kSignalVar ? k.log_signal_var : h == kLengthscaleSq ? k.log_lengthscale_sq : k.log_noise_var;
}

// |a - b| <= rel * max(|b|, 1e-3 * scale), entrywise.
void expect_close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  const double scale = b.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      EXPECT_LE(std::abs(a(i, j) - b(i, j)), rel * std::max(std::abs(b(i, j)), 1e-3 * scale)) << i << "," << j;
}

std::vector<std::pair<KernelSpec, Eigen::MatrixXd>> instances() {
  std::mt19937_64 rng(99);
  std::vector<std::pair<KernelSpec, Eigen::MatrixXd>> out;
  for (int t = 0; t < 6; ++t) {
    const int n = 3 + t;
    const int q = 1 + t % 3;
    Eigen::MatrixXd x(n, q);
    for (int i = 0; i < n; ++i) x.row(i) = testing::normal_vector(rng, q).transpose();
    out.emplace_back(spec(KernelFamily::Rbf, 0.5 + 0.3 * t, 0.7 + 0.2 * t, 1e-2), x);
    Eigen::MatrixXd t1(n, 1);
    for (int i = 0; i < n; ++i) t1(i, 0) = std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
    out.emplace_back(spec(KernelFamily::Periodic, 1.3, 0.4 + 0.3 * t, 5e-3), t1);
  }
  return out;
}

TEST(KernelEvalTest, Examples) {
  const KernelSpec rbf = spec(KernelFamily::Rbf, 2.5, 1.0, 0.1);
  const Eigen::Vector2d x(0.3, -1.2);
  EXPECT_DOUBLE_EQ(eval(rbf, x, x), 2.5);
  const KernelSpec unit = spec(KernelFamily::Rbf, 1.0, 1.0, 0.1);
  EXPECT_NEAR(eval(unit, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), std::exp(-1.0), 1e-15);

  const KernelSpec per = spec(KernelFamily::Periodic, 1.7, 0.5, 0.1);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 0.8);
  const Eigen::VectorXd t2 = Eigen::VectorXd::Constant(1, 0.8 + 2.0 * pi);
  EXPECT_NEAR(eval(per, t, t2), 1.7, 1e-12);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 2.1);
  EXPECT_NEAR(eval(per, t, u), 1.7 * std::exp(-2.0 * std::pow(std::sin(1.3 / 2.0), 2) / 0.5), 1e-14);
  EXPECT_DOUBLE_EQ(eval(per, t, u), eval(per, u, t));
}

TEST(KernelEvalTest, Errors) {
  const KernelSpec per = spec(KernelFamily::Periodic, 1.0, 1.0, 0.1);
  EXPECT_THROW(eval(per, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), DimensionError);
  EXPECT_THROW(eval(KernelSpec{}, Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 1, 1)), DimensionError);
  EXPECT_THROW(kernel_family_from_string("matern"), ConfigError);
  EXPECT_EQ(kernel_family_from_string("periodic"), KernelFamily::Periodic);
}

TEST(GramTest, SingleRowAndDuplicates) {
  const KernelSpec k = spec(KernelFamily::Rbf, 2.0, 1.0, 0.25);
  EXPECT_DOUBLE_EQ(gram(k, Eigen::MatrixXd::Constant(1, 2, 0.4))(0, 0), 2.25);
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.0, 1.0;
  const Eigen::MatrixXd g = gram(k, x);
  EXPECT_DOUBLE_EQ(g(0, 2), g(1, 2));
  EXPECT_DOUBLE_EQ(g(0, 1), 2.0);
}

TEST(GramTest, SymmetricWithNoiseShiftedSpectrum) {
  for (const auto& [k, x] : instances()) {
    const Eigen::MatrixXd g = gram(k, x);
    EXPECT_EQ(g, g.transpose());
    const Eigen::MatrixXd noiseless = g - k.noise_var() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
    const Eigen::VectorXd ev0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(noiseless).eigenvalues();
    EXPECT_GE(ev.minCoeff(), k.noise_var() - 1e-10);
    EXPECT_LT((ev - ev0 - Eigen::VectorXd::Constant(ev.size(), k.noise_var())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(KernelGradientTest, SignalVarianceDerivativeIsNoiselessGram) {
  for (const auto& [k, x] : instances()) {
    const auto g = grad_hyper(k, x);
    const Eigen::MatrixXd expected = gram(k, x) - k.noise_var() * Eigen::MatrixXd::Identity(x.rows(), x.rows());
    EXPECT_LT((g[kSignalVar] - expected).norm(), 1e-14);
  }
}

TEST(KernelGradientTest, HyperparametersMatchFiniteDifferences) {
  const double h = 1e-6;
  for (const auto& [k, x] : instances()) {
    const auto g = grad_hyper(k, x);
    for (int p = 0; p < kNumHyper; ++p) {
      KernelSpec plus = k, minus = k;
      hyper(plus, p) += h;
      hyper(minus, p) -= h;
      expect_close(g[static_cast<std::size_t>(p)], (gram(plus, x) - gram(minus, x)) / (2.0 * h), 1e-5);
    }
  }
}

TEST(KernelGradientTest, InputsMatchFiniteDifferences) {
  const double h = 1e-6;
  for (const auto& [k, x] : instances()) {
    for (int i = 0; i < x.rows(); ++i) {
      for (int a = 0; a < x.cols(); ++a) {
        Eigen::MatrixXd plus = x, minus = x;
        plus(i, a) += h;
        minus(i, a) -= h;
        const Eigen::MatrixXd fd = (gram(k, plus) - gram(k, minus)) / (2.0 * h);
        const Eigen::MatrixXd an = grad_input(k, x, i, a);
        expect_close(an, fd, 1e-5);
        for (int r = 0; r < x.rows(); ++r) {
          for (int c = 0; c < x.rows(); ++c) {
            if (r != i && c != i) {
              EXPECT_EQ(an(r, c), 0.0);
            }
          }
        }
      }
    }
  }
}

TEST(KernelGradientTest, CrossGradientMatchesFiniteDifferences) {
  const double h = 1e-6;
  std::mt19937_64 rng(4);
  for (const auto& [k, x] : instances()) {
    const Eigen::VectorXd xs = testing::normal_vector(rng, x.cols());
    Eigen::MatrixXd fd(x.rows(), x.cols());
    for (int a = 0; a < x.cols(); ++a) {
      Eigen::VectorXd plus = xs, minus = xs;
      plus(a) += h;
      minus(a) -= h;
      fd.col(a) = (cross(k, x, plus) - cross(k, x, minus)) / (2.0 * h);
    }
    expect_close(cross_grad(k, x, xs), fd, 1e-5);
    const Eigen::VectorXd row0 = x.row(0).transpose();
    expect_close(eval_grad_first(k, xs, row0).transpose(), fd.row(0), 1e-5);
  }
}

TEST(KernelGradientTest, IsolatedRowHasVanishingDerivative) {
  const KernelSpec k = spec(KernelFamily::Rbf, 1.0, 0.1, 0.01);
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0.1, 0.2, -0.2, 0.1, 50, 50;
  for (int a = 0; a < 2; ++a) EXPECT_LT(grad_input(k, x, 3, a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KernelGradientTest, ContractionMatchesExplicitSum) {
  std::mt19937_64 rng(12);
  for (const auto& [k, x] : instances()) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd w = Eigen::MatrixXd::Random(n, n);
    w = (w + w.transpose()).eval();
    const ContractedGradient c = contract_gradient(k, x, w);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < x.cols(); ++a)
        EXPECT_NEAR(c.latents(i, a), (w.array() * grad_input(k, x, i, a).array()).sum(), 1e-10);
    const auto gh = grad_hyper(k, x);
    for (int p = 0; p < kNumHyper; ++p)
      EXPECT_NEAR(c.hyper[static_cast<std::size_t>(p)], (w.array() * gh[static_cast<std::size_t>(p)].array()).sum(),
                  1e-10);
  }
}

}  // namespace
}  // namespace wgplvm
