#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "matern4d/score_statistic.hpp"
#include "matern4d/spectral_simulator.hpp"

using namespace matern4d;

namespace {

std::size_t mirror(const Shape4& n, std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                   const ComplexTensor4& t) {
  return t.offset((n[0] - i) % n[0], (n[1] - j) % n[1], (n[2] - k) % n[2], (n[3] - l) % n[3]);
}

double hermitian_defect(const ComplexTensor4& t) {
  const Shape4& n = t.shape();
  double worst = 0.0;
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t l = 0; l < n[3]; ++l)
          worst = std::max(worst, std::abs(t(i, j, k, l) - std::conj(t[mirror(n, i, j, k, l, t)])));
  return worst;
}

SimConfig small_config(int M, double alpha2 = 2.0) {
  SimConfig c;
  c.lattice = FreqLattice(M, 2);
  c.pair = ModelPair::matched(1.0, 1.0, alpha2, 1.5);
  c.master_seed = 99;
  return c;
}

// Kolmogorov-Smirnov distance of a sample from N(0, 1).
double ks_distance(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-x[i] / std::numbers::sqrt2);
    d = std::max({d, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
  }
  return d;
}

}  // namespace

TEST(DrawHermitian, SymmetryIsExact) {
  RngStream rng(1);
  const FreqLattice lat(4, 2);
  const ComplexTensor4 g = draw_hermitian(lat, rng);
  EXPECT_EQ(hermitian_defect(g), 0.0);
  // Self-conjugate modes: every coordinate in {0, -M}, i.e. positions 0 and M.
  for (std::size_t i : {0u, 4u})
    for (std::size_t j : {0u, 4u})
      for (std::size_t k : {0u, 4u})
        for (std::size_t l : {0u, 4u}) EXPECT_EQ(g(i, j, k, l).imag(), 0.0);
}

TEST(DrawHermitian, UnitMeanPower) {
  const FreqLattice lat(3, 1);
  const std::size_t modes[5] = {0, 1, 3 * 216, lat.offset_of({1, -2, 0, 2}), lat.offset_of({-3, -3, -3, -3})};
  double sum[5] = {};
  const int draws = 10000;
  for (int r = 0; r < draws; ++r) {
    RngStream rng = RngStream::derive(5, StreamDomain::validation, static_cast<std::uint64_t>(r));
    const ComplexTensor4 g = draw_hermitian(lat, rng);
    for (int m = 0; m < 5; ++m) sum[m] += std::norm(g[modes[m]]);
  }
  for (double s : sum) {
    EXPECT_GE(s / draws, 0.94);
    EXPECT_LE(s / draws, 1.06);
  }
}

TEST(SpectralField, AmplitudeAndSymmetry) {
  const FreqLattice lat(4, 2);
  const MaternParams model(1.0, 1.0, 1.5);
  RngStream rng(2);
  const ComplexTensor4 g = draw_hermitian(lat, rng);
  const ComplexTensor4 z = spectral_field(g, model, lat);
  const RealTensor4 f = density_on_lattice(model, lat);
  const double h2 = lat.spacing() * lat.spacing();
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], g[i] * (h2 * std::sqrt(f[i])));
  EXPECT_EQ(hermitian_defect(z), 0.0);
}

TEST(SpectralField, SecondMomentMatchesDensity) {
  const FreqLattice lat(3, 2);
  const MaternParams model(1.0, 1.0, 1.5);
  const RealTensor4 f = density_on_lattice(model, lat);
  const std::size_t modes[3] = {0, lat.offset_of({1, 0, 0, 0}), lat.offset_of({1, -1, 0, 1})};
  double sum[3] = {};
  const int draws = 10000;
  RngStream rng(3);
  for (int r = 0; r < draws; ++r) {
    const ComplexTensor4 z = spectral_field(draw_hermitian(lat, rng), model, lat);
    for (int m = 0; m < 3; ++m) sum[m] += std::norm(z[modes[m]]);
  }
  const double h4 = std::pow(lat.spacing(), 4);
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(sum[m] / draws / (h4 * f[modes[m]]), 1.0, 0.06) << m;
}

TEST(LocalizedCoeffs, PaddedMatchesDirectSumAtSix) {
  const FreqLattice lat(6, 2);
  const TaperKernel kernel(lat, TaperSpec{});
  const MaternParams model(1.0, 1.0, 1.5);
  RngStream rng(4);
  const ComplexTensor4 z = spectral_field(draw_hermitian(lat, rng), model, lat);
  const ComplexTensor4 x = localized_coeffs(z, kernel, ConvMode::padded_linear);
  const auto n = static_cast<std::size_t>(lat.side());
  std::vector<std::vector<double>> t(n, std::vector<double>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t r = 0; r < n; ++r) t[a][r] = kernel.axis_factor(lat.signed_index(a) - lat.signed_index(r));
  double err = 0.0, top = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          Complex acc = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              for (std::size_t k = 0; k < n; ++k) {
                const double w = t[a][i] * t[b][j] * t[c][k];
                for (std::size_t l = 0; l < n; ++l) acc += w * t[d][l] * z(i, j, k, l);
              }
          err = std::max(err, std::abs(acc - x(a, b, c, d)));
          top = std::max(top, std::abs(acc));
        }
  EXPECT_LT(err / top, 1e-12);
}

TEST(LocalizedCoeffs, HermitianInCircularMode) {
  const SpectralSimulator sim(small_config(6));
  const CoefficientField f = sim.simulate(1, 0);
  double top = 0.0;
  for (const Complex& z : f.X.values()) top = std::max(top, std::abs(z));
  EXPECT_LT(hermitian_defect(f.X) / top, 1e-10);
}

TEST(LocalizedCoeffs, PaddedAsymmetryComesFromTheFace) {
  // The box [-M, M-1] has no partner for the face -M, so the truncated sum is
  // only Hermitian once the face of Z is cleared, and then only off the face.
  const SimConfig c = small_config(6);
  const TaperKernel kernel(c.lattice, c.taper);
  RngStream rng(8);
  ComplexTensor4 z = spectral_field(draw_hermitian(c.lattice, rng), c.pair.model1, c.lattice);
  const ComplexTensor4 raw = localized_coeffs(z, kernel, ConvMode::padded_linear);
  double top = 0.0;
  for (const Complex& x : raw.values()) top = std::max(top, std::abs(x));
  EXPECT_GT(hermitian_defect(raw) / top, 1e-3);

  const std::size_t face = 6;
  const Shape4& n = z.shape();
  auto on_face = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return i == face || j == face || k == face || l == face;
  };
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t l = 0; l < n[3]; ++l)
          if (on_face(i, j, k, l)) z(i, j, k, l) = 0.0;
  const ComplexTensor4 x = localized_coeffs(z, kernel, ConvMode::padded_linear);
  double worst = 0.0;
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t l = 0; l < n[3]; ++l)
          if (!on_face(i, j, k, l))
            worst = std::max(worst, std::abs(x(i, j, k, l) - std::conj(x[mirror(n, i, j, k, l, x)])));
  EXPECT_LT(worst / top, 1e-10);
}

TEST(VarianceCurve, PositiveAndMatchesCrossCovDiagonal) {
  const SimConfig c = small_config(6);
  const TaperKernel kernel(c.lattice, c.taper);
  for (ConvMode mode : {ConvMode::circular, ConvMode::padded_linear}) {
    const RealTensor4 v = variance_curve(c.pair.model1, kernel, mode);
    for (double x : v.values()) EXPECT_GT(x, 0.0);
    for (const IVec4& k : {IVec4{0, 0, 0, 0}, IVec4{1, 0, 0, 0}, IVec4{2, -1, 0, 1}, IVec4{-3, -3, 2, 0}}) {
      const auto [sigma, pi] = cross_cov_discrete(k, k, c.pair.model1, kernel, mode);
      EXPECT_NEAR(sigma.real() / v[c.lattice.offset_of(k)], 1.0, 1e-12);
      EXPECT_EQ(sigma.imag(), 0.0);
    }
  }
}

TEST(VarianceCurve, MatchesDirectSumAtSix) {
  const SimConfig c = small_config(6);
  const TaperKernel kernel(c.lattice, c.taper);
  const FreqLattice& lat = c.lattice;
  const RealTensor4 f = density_on_lattice(c.pair.model2, lat);
  const RealTensor4 v = variance_curve(c.pair.model2, kernel, ConvMode::circular);
  const auto n = static_cast<std::size_t>(lat.side());
  const double h4 = std::pow(lat.spacing(), 4);
  // Spot-check positions against h^4 sum_r f(r) K(n - r)^2 over the torus.
  for (const IVec4& p : {IVec4{0, 0, 0, 0}, IVec4{3, 1, 0, 5}, IVec4{11, 11, 6, 2}, IVec4{6, 6, 6, 6}}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) {
            const IVec4 d{p[0] - int(i), p[1] - int(j), p[2] - int(k), p[3] - int(l)};
            const double kv = kernel.torus_value(d);
            acc += f(i, j, k, l) * kv * kv;
          }
    const double fast = v(std::size_t(p[0]), std::size_t(p[1]), std::size_t(p[2]), std::size_t(p[3]));
    EXPECT_NEAR(fast / (h4 * acc), 1.0, 1e-10);
  }
}

TEST(CrossCov, HermitianAndRowAgree) {
  const SimConfig c = small_config(6);
  const TaperKernel kernel(c.lattice, c.taper);
  const IVec4 k{1, 0, -1, 0};
  const RealTensor4 row = cross_cov_row(k, c.pair.model1, kernel);
  for (const IVec4& l : {IVec4{2, 0, 0, 0}, IVec4{-1, 1, 0, 2}, IVec4{-3, 0, 0, 0}, IVec4{1, 0, -1, 0}}) {
    const auto [s_kl, p_kl] = cross_cov_discrete(k, l, c.pair.model1, kernel);
    const auto [s_lk, p_lk] = cross_cov_discrete(l, k, c.pair.model1, kernel);
    EXPECT_NEAR(std::abs(s_kl - std::conj(s_lk)), 0.0, 1e-12 * std::abs(s_kl) + 1e-300);
    EXPECT_NEAR(row[c.lattice.offset_of(l)] / s_kl.real(), 1.0, 1e-10);
  }
  EXPECT_THROW(cross_cov_discrete({3, 0, 0, 0}, k, c.pair.model1, kernel), std::out_of_range);
}

TEST(CrossCov, PseudoCovarianceOfConjugatePair) {
  // X_{-k} = conj(X_k), so E[X_k X_{-k}] = E|X_k|^2.
  const SimConfig c = small_config(6);
  const TaperKernel kernel(c.lattice, c.taper);
  const IVec4 k{2, -1, 0, 1};
  const auto [sigma, pi] = cross_cov_discrete(k, {-2, 1, 0, -1}, c.pair.model1, kernel);
  const auto [v, unused] = cross_cov_discrete(k, k, c.pair.model1, kernel);
  EXPECT_NEAR(pi.real() / v.real(), 1.0, 1e-12);
  EXPECT_NEAR(pi.imag() / v.real(), 0.0, 1e-12);
}

TEST(Simulator, EmpiricalVarianceAtThreeDefaultConfig) {
  const SpectralSimulator sim(SimConfig::matched_experiment(2.0));
  const IVec4 k{3, 0, 0, 0};
  const std::size_t at = sim.lattice().offset_of(k);
  double sum = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) sum += std::norm(sim.simulate(1, static_cast<std::uint64_t>(r)).X[at]);
  EXPECT_NEAR(sum / reps / sim.variance(1)[at], 1.0, 0.25);
}

TEST(Simulator, DeterministicAcrossThreads) {
  const SpectralSimulator sim(small_config(8));
  const Shell shell = shell_indices(1, 3, sim.lattice());
  const MCResult a = mc_experiment(sim, shell, 6, 2, 1);
  const MCResult b = mc_experiment(sim, shell, 6, 2, 3);
  EXPECT_EQ(a.per_rep_T, b.per_rep_T);
  const CoefficientField x = sim.simulate(1, 4), y = sim.simulate(1, 4);
  EXPECT_EQ(x.X, y.X);
  EXPECT_NE(sim.simulate(1, 5).X, x.X);
}

TEST(Simulator, ScaleInvarianceOfT) {
  SimConfig c1 = SimConfig::matched_experiment(2.0);
  SimConfig c7 = c1;
  c7.pair = ModelPair::matched(7.0, 1.0, 2.0, 1.5);
  const SpectralSimulator s1(c1), s7(c7);
  const Shell shell = shell_indices(3, 9, s1.lattice());
  for (int tag : {1, 2}) {
    const MCResult a = mc_experiment(s1, shell, 2, tag);
    const MCResult b = mc_experiment(s7, shell, 2, tag);
    for (std::size_t r = 0; r < a.per_rep_T.size(); ++r) {
      EXPECT_NEAR(a.per_rep_T[r], b.per_rep_T[r], 1e-10) << tag << " " << r;
    }
  }
}

TEST(Simulator, GaussianMarginals) {
  const SpectralSimulator sim(small_config(8));
  const IVec4 ks[3] = {{1, 0, 0, 0}, {0, 2, -1, 0}, {-3, 3, 0, 1}};
  // Re X_k has variance (v + Re Pi(k, k)) / 2; Pi(k, k) is not negligible this close to the origin.
  double scale[3];
  for (int i = 0; i < 3; ++i) {
    const auto [sigma, pi] = cross_cov_discrete(ks[i], ks[i], sim.model(1), sim.kernel());
    scale[i] = std::sqrt((sigma.real() + pi.real()) / 2.0);
  }
  std::vector<double> samples[3];
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    const CoefficientField f = sim.simulate(1, static_cast<std::uint64_t>(r));
    for (int i = 0; i < 3; ++i) {
      samples[i].push_back(f.X[sim.lattice().offset_of(ks[i])].real() / scale[i]);
    }
  }
  // Critical value of the one-sample KS statistic at level 0.01.
  const double critical = 1.628 / std::sqrt(static_cast<double>(reps));
  for (int i = 0; i < 3; ++i) EXPECT_LT(ks_distance(samples[i]), critical) << i;
}

TEST(Simulator, WickIdentity) {
  const SpectralSimulator sim(small_config(6));
  const FreqLattice& lat = sim.lattice();
  const IVec4 base{1, 0, 0, 0};
  const IVec4 others[5] = {{1, 0, 0, 0}, {2, 0, 0, 0}, {-1, 0, 0, 0}, {1, 1, 0, 0}, {0, -2, 1, 0}};
  const int reps = 5000;
  std::vector<double> pa(reps), pb[5];
  for (auto& v : pb) v.resize(reps);
  for (int r = 0; r < reps; ++r) {
    const CoefficientField f = sim.simulate(1, static_cast<std::uint64_t>(r));
    pa[r] = std::norm(f.at(base, lat));
    for (int i = 0; i < 5; ++i) pb[i][r] = std::norm(f.at(others[i], lat));
  }
  const double va = sim.variance(1)[lat.offset_of(base)];
  for (int i = 0; i < 5; ++i) {
    const double vb = sim.variance(1)[lat.offset_of(others[i])];
    const auto [sigma, pi] = cross_cov_discrete(base, others[i], sim.model(1), sim.kernel());
    std::vector<double> prod(reps);
    for (int r = 0; r < reps; ++r) prod[r] = (pa[r] - va) * (pb[i][r] - vb);
    const auto [mean, var] = mean_and_variance(prod);
    const double se = std::sqrt(var / reps);
    EXPECT_LT(std::abs(mean - (std::norm(sigma) + std::norm(pi))), 5.0 * se) << i;
  }
}

TEST(Simulator, RejectsBadTag) {
  const SpectralSimulator sim(small_config(3));
  EXPECT_THROW(sim.simulate(3, 0), std::invalid_argument);
  EXPECT_THROW(sim.variance(0), std::invalid_argument);
}

TEST(RollHalf, SwapsTorusAndBoxOrder) {
  RealTensor4 t = RealTensor4::cube(4);
  t(0, 0, 0, 0) = 1.0;
  t(3, 0, 1, 2) = 2.0;
  const RealTensor4 r = roll_half(t);
  EXPECT_EQ(r(2, 2, 2, 2), 1.0);
  EXPECT_EQ(r(1, 2, 3, 0), 2.0);
  EXPECT_EQ(roll_half(r), t);
}
