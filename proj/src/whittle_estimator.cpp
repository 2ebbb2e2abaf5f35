#include "matern4d/whittle_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "matern4d/parallel.hpp"
#include "matern4d/spectral_simulator.hpp"

namespace matern4d {

ObsGrid::ObsGrid(int n) : n_obs(n) {
  if (n < 2) throw std::invalid_argument("ObsGrid: n_obs must be >= 2");
}

double ObsGrid::h() const noexcept { return 2.0 * std::numbers::pi / n_obs; }

std::size_t ObsGrid::total() const noexcept {
  const auto n = static_cast<std::size_t>(n_obs);
  return n * n * n * n;
}

Shape4 ObsGrid::shape() const noexcept {
  const auto n = static_cast<std::size_t>(n_obs);
  return {n, n, n, n};
}

std::vector<double> WhittleConfig::make_grid(double alpha_min, double alpha_max, double step) {
  if (!(alpha_min > 0.0) || !(step > 0.0) || alpha_max < alpha_min) {
    throw std::invalid_argument("alpha grid needs 0 < alpha_min <= alpha_max and step > 0");
  }
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double a = alpha_min + static_cast<double>(i) * step;
    if (a > alpha_max + 1e-9) break;
    grid.push_back(a);
  }
  return grid;
}

void WhittleConfig::validate() const {
  if (alpha_grid.empty()) throw std::invalid_argument("whittle: alpha grid must be nonempty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0)) throw std::invalid_argument("whittle: alpha grid values must be positive");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw std::invalid_argument("whittle: alpha grid must be strictly increasing");
    }
  }
  if (reps < 1) throw std::invalid_argument("whittle: reps must be >= 1");
}

double grid_covariance(const IVec4& r, double alpha, double nu, int n_obs) {
  const ObsGrid grid(n_obs);
  const double dist = grid.h() * std::sqrt(static_cast<double>(norm2(r)));
  return covariance(dist, MaternParams(std::pow(alpha, -nu), alpha, nu));
}

double triangle_weights(const IVec4& r, int n_obs) {
  double w = 1.0;
  for (int c : r) w *= static_cast<double>(std::max(0, n_obs - std::abs(c)));
  return w;
}

RealTensor4 u_alpha(double alpha, double nu, int n_obs) {
  const ObsGrid grid(n_obs);
  const int n = n_obs;
  const MaternParams params(std::pow(alpha, -nu), alpha, nu);
  // c_alpha(r) A(r) vanishes for |r|_inf >= n; fold the rest mod n.
  std::vector<double> tri(static_cast<std::size_t>(2 * n - 1));
  for (int r = -(n - 1); r <= n - 1; ++r) tri[static_cast<std::size_t>(r + n - 1)] = n - std::abs(r);
  ComplexTensor4 folded(grid.shape());
  const double h = grid.h();
  for (int a = -(n - 1); a <= n - 1; ++a)
    for (int b = -(n - 1); b <= n - 1; ++b)
      for (int c = -(n - 1); c <= n - 1; ++c)
        for (int d = -(n - 1); d <= n - 1; ++d) {
          const double dist = h * std::sqrt(static_cast<double>(a * a + b * b + c * c + d * d));
          const double weight = tri[static_cast<std::size_t>(a + n - 1)] * tri[static_cast<std::size_t>(b + n - 1)] *
                                tri[static_cast<std::size_t>(c + n - 1)] * tri[static_cast<std::size_t>(d + n - 1)];
          folded.wrapped({a, b, c, d}) += covariance(dist, params) * weight;
        }
  dft_forward_inplace(folded);
  const double h8 = std::pow(h, 8);
  RealTensor4 u(grid.shape());
  double min_value = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex z = folded[i] * h8;
    if (std::abs(z.imag()) >= 1e-10 * std::abs(z.real()) + 1e-14) {
      throw std::logic_error("u_alpha: imaginary residue after folding");
    }
    u[i] = z.real();
    min_value = std::min(min_value, u[i]);
  }
  if (min_value < -1e-12) throw std::logic_error("u_alpha: negative variance after folding");
  for (double& x : u.values()) x = std::max(x, 0.0);
  return u;
}

RealTensor4 synthesize_field(int n_obs, double alpha, double nu, double m, RngStream& rng) {
  const ObsGrid grid(n_obs);
  if (!(m > 0.0)) throw std::invalid_argument("synthesize_field: m must be positive");
  const MaternParams params(std::sqrt(m) * std::pow(alpha, -nu), alpha, nu);
  const double h = grid.h();
  double last_min = 0.0;
  for (int side = 2 * n_obs; side <= 8 * n_obs; side *= 2) {
    const auto L = static_cast<std::size_t>(side);
    std::vector<double> wrapped(L);
    for (std::size_t t = 0; t < L; ++t) wrapped[t] = static_cast<double>(std::min(t, L - t));
    ComplexTensor4 eig = ComplexTensor4::cube(L);
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j)
        for (std::size_t k = 0; k < L; ++k)
          for (std::size_t l = 0; l < L; ++l) {
            const double d2 = wrapped[i] * wrapped[i] + wrapped[j] * wrapped[j] + wrapped[k] * wrapped[k] +
                              wrapped[l] * wrapped[l];
            eig(i, j, k, l) = covariance(h * std::sqrt(d2), params);
          }
    dft_forward_inplace(eig);
    double lo = eig[0].real();
    double hi = eig[0].real();
    for (const Complex& z : eig.values()) {
      lo = std::min(lo, z.real());
      hi = std::max(hi, z.real());
    }
    last_min = lo;
    if (lo < -1e-8 * hi) continue;

    ComplexTensor4 w = draw_hermitian(eig.shape(), rng);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::sqrt(std::max(eig[i].real(), 0.0));
    dft_inverse_inplace(w);
    const double scale = std::sqrt(static_cast<double>(w.size()));
    RealTensor4 field(grid.shape());
    const auto n = static_cast<std::size_t>(n_obs);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) field(i, j, k, l) = scale * w(i, j, k, l).real();
    return field;
  }
  std::ostringstream msg;
  msg << "synthesize_field: circulant embedding failed (min eigenvalue " << last_min << " at side "
      << 8 * n_obs << ")";
  throw std::runtime_error(msg.str());
}

GridCoefficients dft_coeffs(const RealTensor4& field, int n_obs) {
  const ObsGrid grid(n_obs);
  if (field.shape() != grid.shape()) throw std::invalid_argument("dft_coeffs: field shape must be n_obs^4");
  ComplexTensor4 z(grid.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = Complex(field[i], 0.0);
  dft_forward_inplace(z);
  const double h4 = std::pow(grid.h(), 4);
  RealTensor4 power(grid.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] *= h4;
    power[i] = std::norm(z[i]);
  }
  return {std::move(z), std::move(power)};
}

std::vector<IVec4> half_spectrum(int n_obs) {
  const ObsGrid grid(n_obs);
  const int n = grid.n_obs;
  // Signed representative in (-n/2, n/2].
  auto sgn = [n](int t) { return 2 * t > n ? t - n : t; };
  std::vector<IVec4> out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const IVec4 k{a, b, c, d};
          if (a == 0 && b == 0 && c == 0 && d == 0) continue;
          const IVec4 neg{(n - a) % n, (n - b) % n, (n - c) % n, (n - d) % n};
          if (neg == k) {
            out.push_back(k);
            continue;
          }
          const IVec4 sk{sgn(a), sgn(b), sgn(c), sgn(d)};
          const IVec4 sn{sgn(neg[0]), sgn(neg[1]), sgn(neg[2]), sgn(neg[3])};
          if (sk < sn) out.push_back(k);
        }
  return out;
}

namespace {

std::size_t flat(const RealTensor4& t, const IVec4& k) {
  return t.offset(static_cast<std::size_t>(k[0]), static_cast<std::size_t>(k[1]), static_cast<std::size_t>(k[2]),
                  static_cast<std::size_t>(k[3]));
}

void require_positive_u(double u) {
  if (!(u > 0.0)) throw std::domain_error("whittle: u_alpha(k) vanishes on the retained frequency set");
}

}  // namespace

double profile_m(const RealTensor4& I, const RealTensor4& u, std::span<const IVec4> k_set) {
  if (k_set.empty()) throw std::invalid_argument("profile_m: empty frequency set");
  double sum = 0.0;
  for (const IVec4& k : k_set) {
    const std::size_t i = flat(u, k);
    require_positive_u(u[i]);
    sum += I[i] / u[i];
  }
  return sum / static_cast<double>(k_set.size());
}

double whittle_objective(const RealTensor4& I, const RealTensor4& u, double m, std::span<const IVec4> k_set) {
  if (!(m > 0.0)) throw std::invalid_argument("whittle_objective: m must be positive");
  double q = 0.0;
  for (const IVec4& k : k_set) {
    const std::size_t i = flat(u, k);
    require_positive_u(u[i]);
    const double scaled = m * u[i];
    q += std::log(scaled) + I[i] / scaled;
  }
  return q;
}

WhittleModel::WhittleModel(int n_obs, const WhittleConfig& config, unsigned threads)
    : n_obs_(ObsGrid(n_obs).n_obs), grid_(config.alpha_grid), k_set_(half_spectrum(n_obs)) {
  config.validate();
  tables_.resize(grid_.size());
  parallel_for(grid_.size(), threads, [&](std::size_t i) { tables_[i] = u_alpha(grid_[i], config.nu, n_obs_); });
}

WhittleFit WhittleModel::fit_periodogram(const RealTensor4& I) const {
  WhittleFit out;
  out.objective_curve.reserve(grid_.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double m_hat = profile_m(I, tables_[i], k_set_);
    const double q = whittle_objective(I, tables_[i], m_hat, k_set_);
    out.objective_curve.push_back({grid_[i], q, m_hat});
    if (q < out.objective_curve[best].objective) best = i;
  }
  out.alpha_hat = out.objective_curve[best].alpha;
  out.m_hat = out.objective_curve[best].m_hat;
  return out;
}

WhittleFit WhittleModel::fit(const RealTensor4& field) const {
  return fit_periodogram(dft_coeffs(field, n_obs_).I);
}

WhittleFit fit(const RealTensor4& field, const WhittleConfig& config) {
  const auto n = static_cast<int>(field.extent(0));
  return WhittleModel(n, config).fit(field);
}

}  // namespace matern4d
