#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace matern4d {

/// Spatial dimension. Everything in this library is specialised to d = 4.
inline constexpr int kDim = 4;

using Vec4 = std::array<double, kDim>;
using IVec4 = std::array<int, kDim>;

/// Raised for covariance evaluation at a smoothness without a closed form.
class UnsupportedSmoothness : public std::invalid_argument {
 public:
  explicit UnsupportedSmoothness(double nu);
};

/// Matérn parameters (sigma, alpha, nu) in dimension 4.
///
/// The microergodic scale m = sigma^2 alpha^(2 nu) and the spectral exponent
/// p = nu + 2 are computed once at construction.
class MaternParams {
 public:
  MaternParams(double sigma, double alpha, double nu);

  /// Parameters with sigma chosen so that microergodic() == m.
  static MaternParams from_microergodic(double m, double alpha, double nu);

  double sigma() const noexcept { return sigma_; }
  double alpha() const noexcept { return alpha_; }
  double nu() const noexcept { return nu_; }
  double m() const noexcept { return m_; }
  double p() const noexcept { return p_; }

 private:
  double sigma_;
  double alpha_;
  double nu_;
  double m_;
  double p_;
};

/// Two Matérn models compared by the score statistic.
struct ModelPair {
  MaternParams model1;
  MaternParams model2;

  /// Both models share m and nu; sigma_j follows from m and alpha_j.
  static ModelPair matched(double m, double alpha1, double alpha2, double nu);

  /// True when the microergodic parameters agree to 1e-12 relative.
  bool is_matched() const noexcept;
};

enum class SpectralMode { unit_constant, normalized };

double microergodic(const MaternParams& params) noexcept;

/// C_nu such that (2 pi)^-4 \int C_nu m (alpha^2 + |xi|^2)^-p dxi = sigma^2.
double normalization_constant(double nu) noexcept;

double spectral_density(const Vec4& xi, const MaternParams& params,
                        SpectralMode mode = SpectralMode::unit_constant) noexcept;

/// Same as spectral_density, taking |xi|^2 directly (hot loops).
double spectral_density_norm2(double xi_norm2, const MaternParams& params,
                              SpectralMode mode = SpectralMode::unit_constant) noexcept;

/// Matérn covariance at distance h for nu in {1/2, 3/2, 5/2}.
double covariance(double h, const MaternParams& params);

/// ((alpha1^2 + |k|^2) / (alpha2^2 + |k|^2))^p - 1, for k != 0.
double delta_analytic(const IVec4& k, double alpha1, double alpha2, double nu);

/// Leading term p (alpha1^2 - alpha2^2) |k|^-2, for k != 0.
double delta_leading(const IVec4& k, double alpha1, double alpha2, double nu);

long long norm2(const IVec4& k) noexcept;
double norm2(const Vec4& xi) noexcept;
int norm_inf(const IVec4& k) noexcept;

}  // namespace matern4d
