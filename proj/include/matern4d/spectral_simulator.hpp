#pragma once

#include <cstdint>
#include <utility>

#include "matern4d/matern_model.hpp"
#include "matern4d/rng.hpp"
#include "matern4d/taper_lattice.hpp"
#include "matern4d/tensor_fft.hpp"

namespace matern4d {

struct SimConfig {
  FreqLattice lattice{20, 2};
  TaperSpec taper{};
  ModelPair pair = ModelPair::matched(1.0, 1.0, 2.0, 1.5);
  ConvMode conv_mode = ConvMode::circular;
  std::uint64_t master_seed = 0;

  /// M = 20, h_xi = 1/2, R = 2, Q = 400, nu = 3/2, m = 1, alpha1 = 1.
  static SimConfig matched_experiment(double alpha2);
};

/// Localized coefficients X over the lattice, torus-indexed.
struct CoefficientField {
  ComplexTensor4 X;
  int model_tag = 1;
  std::uint64_t seed_used = 0;

  /// X_k = X_{qk}; throws std::out_of_range for non-representable k.
  Complex at(const IVec4& k, const FreqLattice& lattice) const;
};

/// Hermitian complex Gaussian family on a torus of the given shape.
///
/// One draw per {n, -n} pair (negation mod the extent of each axis), with
/// E|G_n|^2 = 1 everywhere: real and imaginary parts have variance 1/2 on
/// paired modes, self-conjugate modes are real standard normal.
ComplexTensor4 draw_hermitian(const Shape4& shape, RngStream& rng);
ComplexTensor4 draw_hermitian(const FreqLattice& lattice, RngStream& rng);

/// Z_n = h_xi^2 sqrt(f(xi_n)) G_n with the unit-constant density.
ComplexTensor4 spectral_field(const ComplexTensor4& G, const MaternParams& model, const FreqLattice& lattice);

/// f(xi_n) at every torus position (unit-constant mode).
RealTensor4 density_on_lattice(const MaternParams& model, const FreqLattice& lattice);

/// X = K * Z over the lattice in the requested convolution mode.
ComplexTensor4 localized_coeffs(const ComplexTensor4& Z, const TaperKernel& kernel, ConvMode mode);

/// v(n) = h_xi^4 sum_r f(xi_r) |K(n - r)|^2, so that E|X_n|^2 = v(n) exactly.
RealTensor4 variance_curve(const MaternParams& model, const TaperKernel& kernel, ConvMode mode);

/// (Sigma(k,l), Pi(k,l)) = (E[X_k conj(X_l)], E[X_k X_l]) by direct summation.
std::pair<Complex, Complex> cross_cov_discrete(const IVec4& k, const IVec4& l, const MaternParams& model,
                                               const TaperKernel& kernel, ConvMode mode = ConvMode::circular);

/// Sigma(k, .) at every lattice position in one circular convolution: entry
/// at position ql equals Sigma(k, l) of cross_cov_discrete in circular mode.
RealTensor4 cross_cov_row(const IVec4& k, const MaternParams& model, const TaperKernel& kernel);

/// Rolls a 2M-torus tensor by M per axis (torus order <-> box order).
template <class T>
Tensor4<T> roll_half(const Tensor4<T>& t);

/// Fixed per-configuration state: kernel, sqrt-density multipliers and the
/// exact variance curves of both models. Immutable after construction.
class SpectralSimulator {
 public:
  explicit SpectralSimulator(const SimConfig& config);
  SpectralSimulator(const SimConfig& config, TaperKernel kernel);

  const SimConfig& config() const noexcept { return config_; }
  const FreqLattice& lattice() const noexcept { return config_.lattice; }
  const TaperKernel& kernel() const noexcept { return kernel_; }
  const MaternParams& model(int tag) const;
  const RealTensor4& variance(int tag) const;

  /// One replicate under model `tag` from the stream (master_seed, tag, replicate).
  CoefficientField simulate(int tag, std::uint64_t replicate) const;
  /// Same pipeline from an explicit stream.
  CoefficientField simulate_with(int tag, RngStream& rng) const;

 private:
  SimConfig config_;
  TaperKernel kernel_;
  RealTensor4 amplitude_[2];  // h_xi^2 sqrt(f_j)
  RealTensor4 variance_[2];
};

}  // namespace matern4d
