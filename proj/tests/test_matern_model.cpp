#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "matern4d/matern_model.hpp"

using namespace matern4d;

namespace {

// \int_0^inf r^3 (alpha^2 + r^2)^-p dr = alpha^(4 - 2p) / (2 (p - 1) (p - 2)), via r^2 = alpha^2 t / (1 - t).
double radial_integral(double alpha, double p) { return std::pow(alpha, 4.0 - 2.0 * p) / (2.0 * (p - 1.0) * (p - 2.0)); }

}  // namespace

TEST(MaternParams, RejectsNonpositive) {
  EXPECT_THROW(MaternParams(0.0, 1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(MaternParams(1.0, -1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(MaternParams(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(MaternParams, DerivedQuantities) {
  const MaternParams p(2.0, 3.0, 1.5);
  EXPECT_DOUBLE_EQ(p.p(), 3.5);
  EXPECT_NEAR(p.m(), 4.0 * std::pow(3.0, 3.0), 1e-12);
}

TEST(Microergodic, Examples) {
  EXPECT_NEAR(microergodic(MaternParams(1.0, 1.0, 1.5)), 1.0, 1e-14);
  EXPECT_NEAR(microergodic(MaternParams(std::pow(2.0, -1.5), 2.0, 1.5)), 1.0, 1e-14);
  EXPECT_NEAR(microergodic(MaternParams(2.0, 1.0, 0.7)), 4.0, 1e-14);
}

TEST(Microergodic, InvariantUnderAlphaRescaling) {
  for (double a : {0.3, 1.0, 2.5, 7.0, 40.0}) {
    const auto p = MaternParams::from_microergodic(3.7, a, 1.5);
    EXPECT_NEAR(microergodic(p) / 3.7, 1.0, 1e-12) << a;
  }
}

TEST(ModelPair, MatchedSharesM) {
  const auto pair = ModelPair::matched(1.0, 1.0, 2.0, 1.5);
  EXPECT_TRUE(pair.is_matched());
  EXPECT_NEAR(pair.model2.sigma(), std::pow(2.0, -1.5), 1e-15);
  const ModelPair loose{MaternParams(1.0, 1.0, 1.5), MaternParams(1.0, 2.0, 1.5)};
  EXPECT_FALSE(loose.is_matched());
}

TEST(SpectralDensity, UnitConstantExamples) {
  const MaternParams p(1.0, 1.0, 1.5);
  EXPECT_DOUBLE_EQ(spectral_density({0, 0, 0, 0}, p), 1.0);
  EXPECT_NEAR(spectral_density({1, 1, 1, 0}, p), 1.0 / 128.0, 1e-16);
}

TEST(SpectralDensity, NormalizationConstantMatchesQuadrature) {
  for (double nu : {0.5, 1.5, 2.5, 0.8}) {
    const double p = nu + 2.0;
    // (2 pi)^-4 * C m * 2 pi^2 \int r^3 (alpha^2 + r^2)^-p dr = sigma^2 at alpha = 1, m = sigma^2.
    const double c = std::pow(2.0 * std::numbers::pi, 4) / (2.0 * std::numbers::pi * std::numbers::pi *
                                                            radial_integral(1.0, p));
    EXPECT_NEAR(normalization_constant(nu) / c, 1.0, 1e-12) << nu;
  }
  EXPECT_NEAR(normalization_constant(1.5), 592.1762640653615, 1e-9);
}

TEST(SpectralDensity, NormalizedModeScalesByConstant) {
  const MaternParams p(1.3, 0.7, 1.5);
  const Vec4 xi{0.5, -1.0, 2.0, 0.25};
  EXPECT_NEAR(spectral_density(xi, p, SpectralMode::normalized),
              normalization_constant(1.5) * spectral_density(xi, p, SpectralMode::unit_constant), 1e-12);
}

TEST(SpectralDensity, StrictlyDecreasingAndPositive) {
  const MaternParams p(1.0, 2.0, 1.5);
  double prev = spectral_density_norm2(0.0, p);
  for (double r = 0.1; r < 200.0; r *= 1.3) {
    const double f = spectral_density_norm2(r * r, p);
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(SpectralDensity, TailLaw) {
  for (double alpha : {0.5, 1.0, 3.0}) {
    const auto p = MaternParams::from_microergodic(2.0, alpha, 1.5);
    const double r = 1e3;
    const double tail = spectral_density_norm2(r * r, p) * std::pow(r, 2 * p.p());
    EXPECT_LT(std::abs(tail / 2.0 - 1.0), 1e-4) << alpha;
  }
}

TEST(Covariance, Examples) {
  EXPECT_DOUBLE_EQ(covariance(0.0, MaternParams(1.7, 2.0, 1.5)), 1.7 * 1.7);
  EXPECT_DOUBLE_EQ(covariance(0.0, MaternParams(0.4, 2.0, 0.5)), 0.16);
  EXPECT_NEAR(covariance(1.0, MaternParams(1.0, 1.0, 0.5)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(covariance(1.0, MaternParams(1.0, 3.0, 1.5)), 4.0 * std::exp(-3.0), 1e-15);
  EXPECT_NEAR(covariance(1.0, MaternParams(1.0, 3.0, 1.5)), 0.19914827347145578, 1e-14);
  // nu = 5/2: (1 + x + x^2 / 3) e^-x.
  EXPECT_NEAR(covariance(0.5, MaternParams(1.0, 2.0, 2.5)), (1.0 + 1.0 + 1.0 / 3.0) * std::exp(-1.0), 1e-15);
}

TEST(Covariance, RejectsUnsupportedSmoothness) {
  EXPECT_THROW(covariance(1.0, MaternParams(1.0, 1.0, 0.7)), UnsupportedSmoothness);
  EXPECT_THROW(covariance(-1.0, MaternParams(1.0, 1.0, 1.5)), std::invalid_argument);
}

TEST(Covariance, NonincreasingAndBounded) {
  for (double nu : {0.5, 1.5, 2.5}) {
    const MaternParams p(1.2, 1.7, nu);
    double prev = covariance(0.0, p);
    for (double h = 0.01; h < 30.0; h += 0.07) {
      const double c = covariance(h, p);
      EXPECT_LE(c, prev + 1e-15);
      EXPECT_LE(c, 1.44 + 1e-15);
      prev = c;
    }
  }
}

TEST(Delta, AnalyticExamples) {
  const IVec4 k{6, 0, 0, 0};
  EXPECT_NEAR(delta_analytic(k, 1.0, 2.0, 1.5), std::pow(37.0 / 40.0, 3.5) - 1.0, 1e-15);
  EXPECT_NEAR(delta_analytic(k, 1.0, 2.0, 1.5), -0.23880475870, 1e-10);
  EXPECT_NEAR(delta_leading(k, 1.0, 2.0, 1.5), -3.5 * 3.0 / 36.0, 1e-15);
  EXPECT_DOUBLE_EQ(delta_analytic({3, 1, 4, 1}, 1.4, 1.4, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(delta_leading({3, 1, 4, 1}, 1.4, 1.4, 1.5), 0.0);
  EXPECT_THROW(delta_analytic({0, 0, 0, 0}, 1.0, 2.0, 1.5), std::invalid_argument);
  EXPECT_THROW(delta_leading({0, 0, 0, 0}, 1.0, 2.0, 1.5), std::invalid_argument);
}

TEST(Delta, RatioApproachesOne) {
  const IVec4 k{20, 0, 0, 0};
  const double ratio = delta_analytic(k, 1.0, 2.0, 1.5) / delta_leading(k, 1.0, 2.0, 1.5);
  EXPECT_LT(std::abs(ratio - 1.0), 0.02);
  EXPECT_NEAR(ratio, 0.98094282505119, 1e-12);
}

TEST(Delta, LeadingSignFollowsAlphaOrder) {
  for (int a = 1; a < 12; ++a) EXPECT_LT(delta_leading({a, a / 2, 0, 1}, 1.0, 2.0, 1.5), 0.0);
}

TEST(Delta, RemainderIsFourthOrder) {
  double worst = 0.0;
  for (int a = 10; a <= 100; a += 3)
    for (int b = 0; b <= a; b += 7) {
      const IVec4 k{a, b, b / 2, 0};
      const double k2 = static_cast<double>(norm2(k));
      const double diff = delta_analytic(k, 1.0, 2.0, 1.5) - delta_leading(k, 1.0, 2.0, 1.5);
      worst = std::max(worst, std::abs(diff) * k2 * k2);
    }
  // The k^-4 coefficient is about 81 here.
  EXPECT_LT(worst, 200.0);
}

TEST(Norms, Basic) {
  EXPECT_EQ(norm2(IVec4{1, -2, 3, 0}), 14);
  EXPECT_EQ(norm_inf(IVec4{1, -7, 3, 0}), 7);
  EXPECT_DOUBLE_EQ(norm2(Vec4{0.5, 0.5, 0.5, 0.5}), 1.0);
}
