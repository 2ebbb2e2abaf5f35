#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "matern4d/matern_model.hpp"
#include "matern4d/rng.hpp"
#include "matern4d/tensor_fft.hpp"

namespace matern4d {

/// Observation lattice x_j = h j, j in {0, ..., n_obs - 1}^4, h = 2 pi / n_obs.
struct ObsGrid {
  int n_obs = 8;

  explicit ObsGrid(int n);
  double h() const noexcept;
  std::size_t total() const noexcept;
  Shape4 shape() const noexcept;
};

struct WhittleConfig {
  double nu = 1.5;
  std::vector<double> alpha_grid;
  int reps = 50;
  std::uint64_t master_seed = 0;

  /// alpha_min, alpha_min + step, ... up to alpha_max (inclusive within 1e-9).
  static std::vector<double> make_grid(double alpha_min, double alpha_max, double step);
  void validate() const;
};

struct ProfilePoint {
  double alpha;
  double objective;  // Q_N(m_hat(alpha), alpha)
  double m_hat;
};

struct WhittleFit {
  double alpha_hat = 0.0;
  double m_hat = 0.0;
  std::vector<ProfilePoint> objective_curve;
};

/// Cov(Y(0), Y(h r)) at the microergodic normalisation m = 1 (sigma^2 = alpha^-2nu).
double grid_covariance(const IVec4& r, double alpha, double nu, int n_obs);

/// A(r) = prod_l (n_obs - |r_l|)_+.
double triangle_weights(const IVec4& r, int n_obs);

/// u_alpha(k) = h^8 sum_r c_alpha(r) A(r) exp(-2 pi i <k, r> / n_obs) on {0..n_obs-1}^4.
RealTensor4 u_alpha(double alpha, double nu, int n_obs);

/// Stationary Gaussian field with covariance m c_alpha(j - j') on the grid, by
/// circulant embedding on a torus of side 2 n_obs (doubling up to 8 n_obs).
RealTensor4 synthesize_field(int n_obs, double alpha, double nu, double m, RngStream& rng);

struct GridCoefficients {
  ComplexTensor4 Z;
  RealTensor4 I;
};

/// Z_k = h^4 sum_j Y(h j) exp(-2 pi i <k, j> / n_obs), I_k = |Z_k|^2.
GridCoefficients dft_coeffs(const RealTensor4& field, int n_obs);

/// One representative of each {k, -k} pair, zero mode excluded, lexicographic.
std::vector<IVec4> half_spectrum(int n_obs);

double profile_m(const RealTensor4& I, const RealTensor4& u, std::span<const IVec4> k_set);
double whittle_objective(const RealTensor4& I, const RealTensor4& u, double m, std::span<const IVec4> k_set);

/// u_alpha tables for every grid candidate, built once and reused per field.
class WhittleModel {
 public:
  WhittleModel(int n_obs, const WhittleConfig& config, unsigned threads = 1);

  int n_obs() const noexcept { return n_obs_; }
  const std::vector<double>& alpha_grid() const noexcept { return grid_; }
  const std::vector<IVec4>& k_set() const noexcept { return k_set_; }
  const RealTensor4& u(std::size_t candidate) const { return tables_.at(candidate); }

  WhittleFit fit(const RealTensor4& field) const;
  WhittleFit fit_periodogram(const RealTensor4& I) const;

 private:
  int n_obs_;
  std::vector<double> grid_;
  std::vector<IVec4> k_set_;
  std::vector<RealTensor4> tables_;
};

/// Profiled grid search; ties resolve to the smaller alpha.
WhittleFit fit(const RealTensor4& field, const WhittleConfig& config);

}  // namespace matern4d
