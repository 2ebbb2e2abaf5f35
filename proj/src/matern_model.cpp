#include "matern4d/matern_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace matern4d {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("MaternParams: ") + name +
                                " must be positive and finite");
  }
}

void require_nonzero(const IVec4& k) {
  if (norm2(k) == 0) {
    throw std::invalid_argument("mismatch is undefined at k = 0");
  }
}

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

UnsupportedSmoothness::UnsupportedSmoothness(double nu)
    : std::invalid_argument("unsupported smoothness nu = " + std::to_string(nu) +
                            " (closed forms exist for nu = 1/2, 3/2, 5/2)") {}

MaternParams::MaternParams(double sigma, double alpha, double nu)
    : sigma_(sigma), alpha_(alpha), nu_(nu) {
  require_positive(sigma, "sigma");
  require_positive(alpha, "alpha");
  require_positive(nu, "nu");
  m_ = sigma * sigma * std::pow(alpha, 2.0 * nu);
  p_ = nu + 0.5 * kDim;
  if (!(m_ > 0.0) || !std::isfinite(m_)) {
    throw std::invalid_argument("MaternParams: microergodic scale is not finite");
  }
}

MaternParams MaternParams::from_microergodic(double m, double alpha, double nu) {
  require_positive(m, "m");
  require_positive(alpha, "alpha");
  return MaternParams(std::sqrt(m) * std::pow(alpha, -nu), alpha, nu);
}

ModelPair ModelPair::matched(double m, double alpha1, double alpha2, double nu) {
  return ModelPair{MaternParams::from_microergodic(m, alpha1, nu),
                   MaternParams::from_microergodic(m, alpha2, nu)};
}

bool ModelPair::is_matched() const noexcept {
  const double m1 = model1.m();
  const double m2 = model2.m();
  return std::abs(m1 - m2) <= 1e-12 * std::max(m1, m2);
}

double microergodic(const MaternParams& params) noexcept { return params.m(); }

double normalization_constant(double nu) noexcept {
  // \int_{R^4} (a^2 + |x|^2)^-p dx = pi^2 a^(-2 nu) / (nu (nu + 1)).
  return 16.0 * std::numbers::pi * std::numbers::pi * nu * (nu + 1.0);
}

double spectral_density_norm2(double xi_norm2, const MaternParams& params,
                              SpectralMode mode) noexcept {
  const double a2 = params.alpha() * params.alpha();
  double f = params.m() * std::pow(a2 + xi_norm2, -params.p());
  if (mode == SpectralMode::normalized) f *= normalization_constant(params.nu());
  return f;
}

double spectral_density(const Vec4& xi, const MaternParams& params,
                        SpectralMode mode) noexcept {
  return spectral_density_norm2(norm2(xi), params, mode);
}

double covariance(double h, const MaternParams& params) {
  if (h < 0.0) throw std::invalid_argument("covariance: distance must be nonnegative");
  const double nu = params.nu();
  const double s2 = params.sigma() * params.sigma();
  const double x = params.alpha() * h;
  const double decay = std::exp(-x);
  if (near(nu, 0.5)) return s2 * decay;
  if (near(nu, 1.5)) return s2 * (1.0 + x) * decay;
  if (near(nu, 2.5)) return s2 * (1.0 + x + x * x / 3.0) * decay;
  throw UnsupportedSmoothness(nu);
}

double delta_analytic(const IVec4& k, double alpha1, double alpha2, double nu) {
  require_nonzero(k);
  const double k2 = static_cast<double>(norm2(k));
  const double p = nu + 0.5 * kDim;
  return std::pow((alpha1 * alpha1 + k2) / (alpha2 * alpha2 + k2), p) - 1.0;
}

double delta_leading(const IVec4& k, double alpha1, double alpha2, double nu) {
  require_nonzero(k);
  const double k2 = static_cast<double>(norm2(k));
  const double p = nu + 0.5 * kDim;
  return p * (alpha1 * alpha1 - alpha2 * alpha2) / k2;
}

long long norm2(const IVec4& k) noexcept {
  long long s = 0;
  for (int c : k) s += static_cast<long long>(c) * c;
  return s;
}

double norm2(const Vec4& xi) noexcept {
  double s = 0.0;
  for (double c : xi) s += c * c;
  return s;
}

int norm_inf(const IVec4& k) noexcept {
  int s = 0;
  for (int c : k) s = std::max(s, std::abs(c));
  return s;
}

}  // namespace matern4d
