#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "matern4d/taper_lattice.hpp"

using namespace matern4d;

namespace {

// High-precision reference values of \int_{-1}^{1} cos(w u) phi(u) du (mpmath, 30 digits).
constexpr double kBumpIntegral = 0.44399381616807944;
constexpr double kBumpHat4 = 0.082634087465722441;
constexpr double kBumpHat8 = -0.020317835042536629;
constexpr double kBumpHat16 = -0.0010414010248649146;
constexpr double kBumpHat18 = 0.0039359437169136672;
constexpr double kBumpHat20 = -0.00056190294995295752;

}  // namespace

TEST(FreqLattice, Geometry) {
  const FreqLattice lat(20, 2);
  EXPECT_EQ(lat.side(), 40);
  EXPECT_DOUBLE_EQ(lat.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(lat.cutoff(), 10.0);
  for (int n = -20; n < 20; ++n) EXPECT_EQ(lat.signed_index(lat.position(n)), n);
  EXPECT_EQ(lat.position(-1), 39u);
  EXPECT_THROW(FreqLattice(0, 2), std::invalid_argument);
  EXPECT_THROW(FreqLattice(4, 0), std::invalid_argument);
}

TEST(FreqLattice, RepresentableRule) {
  const FreqLattice lat(20, 2);
  // Nonnegative frequencies fit iff |k|_inf <= 9; on the negative side q k = -20 still fits.
  for (int a = 0; a <= 12; ++a) EXPECT_EQ(lat.representable({a, 0, 3, 1}), a <= 9) << a;
  EXPECT_TRUE(lat.representable({-10, 0, 0, 0}));
  EXPECT_FALSE(lat.representable({-11, 0, 0, 0}));
  EXPECT_THROW(lat.offset_of({10, 0, 0, 0}), std::out_of_range);
  EXPECT_EQ(lat.offset_of({0, 0, 0, 1}), 2u);
}

TEST(FreqLattice, FrequencyNorm) {
  const FreqLattice lat(3, 2);
  const RealTensor4 f = lat.frequency_norm2();
  EXPECT_DOUBLE_EQ(f(1, 0, 5, 3), 0.25 + 0.0 + 0.25 + 2.25);
}

TEST(TaperSpec, Validation) {
  EXPECT_NO_THROW((TaperSpec{2.0, 400}.validate()));
  EXPECT_THROW((TaperSpec{0.0, 400}.validate()), std::invalid_argument);
  EXPECT_THROW((TaperSpec{2.0, 401}.validate()), std::invalid_argument);
  EXPECT_THROW((TaperSpec{2.0, 0}.validate()), std::invalid_argument);
}

TEST(Bump, Examples) {
  EXPECT_NEAR(bump(0.0), std::exp(-1.0), 1e-16);
  EXPECT_EQ(bump(1.0), 0.0);
  EXPECT_EQ(bump(-1.0), 0.0);
  EXPECT_EQ(bump(2.0), 0.0);
  EXPECT_EQ(bump(-2.0), 0.0);
  EXPECT_NEAR(bump(0.5), std::exp(-4.0 / 3.0), 1e-16);
  EXPECT_NEAR(bump(0.5), 0.2635971381157267, 1e-15);
}

TEST(BumpHat, MatchesReferenceQuadrature) {
  EXPECT_NEAR(bump_hat(0.0, 400), kBumpIntegral, 1e-8);
  EXPECT_NEAR(bump_hat(4.0, 400), kBumpHat4, 1e-10);
  EXPECT_NEAR(bump_hat(8.0, 400), kBumpHat8, 1e-10);
  EXPECT_NEAR(bump_hat(16.0, 400), kBumpHat16, 1e-10);
  EXPECT_NEAR(bump_hat(18.0, 400), kBumpHat18, 1e-10);
  EXPECT_NEAR(bump_hat(20.0, 400), kBumpHat20, 1e-10);
  EXPECT_LT(std::abs(bump_hat(20.0, 400)), 1e-3);
}

TEST(BumpHat, EvenExactly) {
  for (double w : {0.3, 1.0, 7.25, 19.0, 44.4}) EXPECT_EQ(bump_hat(-w, 400), bump_hat(w, 400));
}

TEST(BumpHat, SimpsonConvergence) {
  for (double w = -50.0; w <= 50.0; w += 0.37) {
    EXPECT_LE(std::abs(bump_hat(w, 400) - bump_hat(w, 1600)), 1e-6) << w;
  }
}

TEST(BumpHat, RejectsOddQ) { EXPECT_THROW(bump_hat(1.0, 3), std::invalid_argument); }

TEST(TaperHat, AtOrigin) {
  const TaperSpec spec{};
  EXPECT_NEAR(taper_hat({0, 0, 0, 0}, spec), 16.0 * std::pow(kBumpIntegral, 4), 1e-9);
  EXPECT_NEAR(taper_hat({0, 0, 0, 0}, spec), 0.62176699996752740, 1e-9);
}

TEST(TaperHat, ProductStructure) {
  const TaperSpec spec{};
  const double a = 0.7, b = -2.3;
  const double joint = taper_hat({a, b, 0, 0}, spec) * taper_hat({0, 0, 0, 0}, spec);
  EXPECT_NEAR(joint, taper_hat({a, 0, 0, 0}, spec) * taper_hat({0, b, 0, 0}, spec), 1e-15 * std::abs(joint));
  const Vec4 xi{0.3, 1.1, -2.0, 4.5};
  const double base = taper_hat(xi, spec);
  EXPECT_EQ(taper_hat({xi[3], xi[0], xi[2], xi[1]}, spec), base);
  EXPECT_EQ(taper_hat({xi[1], xi[3], xi[0], xi[2]}, spec), base);
}

TEST(Kernel, OriginAndEvenness) {
  const FreqLattice lat(20, 2);
  const TaperSpec spec{};
  EXPECT_EQ(kernel({0, 0, 0, 0}, lat, spec), taper_hat({0, 0, 0, 0}, spec));
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> pick(-39, 39);
  for (int i = 0; i < 100; ++i) {
    const IVec4 d{pick(gen), pick(gen), pick(gen), pick(gen)};
    EXPECT_EQ(kernel(d, lat, spec), kernel({-d[0], -d[1], -d[2], -d[3]}, lat, spec));
  }
}

TEST(Kernel, DecayAtDistanceSixteen) {
  // Layer maximum at |d|_inf = s is |f(s)| f(0)^3 with axis factor f(s) = 2 bump_hat(s).
  const FreqLattice lat(20, 2);
  const TaperKernel k(lat, TaperSpec{});
  const double drop = k.value({0, 0, 0, 0}) / std::abs(k.value({16, 0, 0, 0}));
  EXPECT_NEAR(drop, kBumpIntegral / std::abs(kBumpHat16), 1e-6);
  EXPECT_GT(drop, 400.0);
}

TEST(Kernel, LayerMaximaShrinkUnderDoubling) {
  const FreqLattice lat(20, 2);
  const TaperKernel k(lat, TaperSpec{});
  auto layer_max = [&](int s) {
    double m = 0.0;
    for (int a = -s; a <= s; ++a)
      for (int b = -s; b <= s; ++b) {
        m = std::max(m, std::abs(k.value({s, a, b, 0})));
        m = std::max(m, std::abs(k.value({a, -s, 0, b})));
      }
    return m;
  };
  const double m2 = layer_max(2), m4 = layer_max(4), m8 = layer_max(8), m16 = layer_max(16);
  EXPECT_NEAR(m2 / m4, 0.31839487986951085 / kBumpHat4, 1e-6);
  EXPECT_NEAR(m4 / m8, kBumpHat4 / std::abs(kBumpHat8), 1e-6);
  EXPECT_NEAR(m8 / m16, std::abs(kBumpHat8 / kBumpHat16), 1e-6);
  EXPECT_GT(m2 / m4, 3.5);
  EXPECT_GT(m4 / m8, 3.5);
  EXPECT_GT(m8 / m16, 5.0);
}

TEST(TaperKernel, TablesAgreeWithKernelFunction) {
  const FreqLattice lat(5, 2);
  const TaperSpec spec{};
  const TaperKernel k(lat, spec);
  for (int a = -9; a <= 9; a += 3)
    for (int b = -9; b <= 9; b += 4) {
      const IVec4 d{a, b, 1, -2};
      EXPECT_NEAR(k.value(d), kernel(d, lat, spec), 1e-15);
    }
  EXPECT_THROW(k.axis_factor(10), std::out_of_range);
  // Torus entries: position d mod 2M holds K at the signed representative.
  EXPECT_NEAR(k.torus_value({7, 0, 0, 0}), k.value({-3, 0, 0, 0}), 1e-15);
  EXPECT_NEAR(k.torus()(9, 0, 0, 0).real(), k.value({-1, 0, 0, 0}), 1e-15);
}

TEST(TaperKernel, CentredLayout) {
  const FreqLattice lat(3, 2);
  const TaperKernel k(lat, TaperSpec{});
  const ComplexTensor4 c = k.centred();
  const ComplexTensor4 c2 = k.centred(true);
  ASSERT_EQ(c.extent(0), 11u);
  EXPECT_NEAR(c(5 + 2, 5, 5 - 4, 5).real(), k.value({2, 0, -4, 0}), 1e-15);
  EXPECT_NEAR(c2(5, 5, 5, 0).real(), std::pow(k.value({0, 0, 0, -5}), 2), 1e-15);
}

TEST(TaperKernel, CChiIsSeparable) {
  const FreqLattice lat(20, 2);
  const TaperKernel k(lat, TaperSpec{});
  double axis = 0.0;
  for (int d = -20; d < 20; ++d) axis += k.axis_factor(d) * k.axis_factor(d);
  const double h = lat.spacing();
  EXPECT_NEAR(k.c_chi() / std::pow(h * axis, 4), 1.0, 1e-10);
}

TEST(TaperKernel, NegatedEntryTouchesOnlyThatEntry) {
  const FreqLattice lat(3, 1);
  const TaperKernel k(lat, TaperSpec{});
  const TaperKernel bad = k.with_negated_entry({1, 0, 0, 0});
  EXPECT_EQ(bad.torus_value({1, 0, 0, 0}), -k.torus_value({1, 0, 0, 0}));
  EXPECT_EQ(bad.torus_value({-1, 0, 0, 0}), k.torus_value({-1, 0, 0, 0}));
}
