#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "matern4d/matern_model.hpp"
#include "matern4d/tensor_fft.hpp"

namespace matern4d {

/// Frequency lattice xi_n = n / q for n in I_M = {-M, ..., M-1}^4.
///
/// Fields on the lattice are stored torus-indexed on a side of 2M: the signed
/// index n lives at position n mod 2M, so negation is taken mod 2M as well.
class FreqLattice {
 public:
  FreqLattice(int half_width, int q);

  int half_width() const noexcept { return half_width_; }
  int q() const noexcept { return q_; }
  int side() const noexcept { return 2 * half_width_; }
  double spacing() const noexcept { return 1.0 / q_; }
  /// Omega = M h_xi, the half-width of the simulated spectral box.
  double cutoff() const noexcept { return half_width_ * spacing(); }
  Shape4 shape() const noexcept;

  /// Torus position of a signed lattice index.
  std::size_t position(int n) const noexcept;
  /// Signed index in {-M, ..., M-1} of a torus position.
  int signed_index(std::size_t position) const noexcept;

  /// Integer frequency k is representable iff q k_a lies in {-M, ..., M-1}.
  bool representable(const IVec4& k) const noexcept;
  /// Flat offset of X_k = X_{qk}; throws std::out_of_range if not representable.
  std::size_t offset_of(const IVec4& k) const;

  /// |xi_n|^2 at every torus position.
  RealTensor4 frequency_norm2() const;

 private:
  int half_width_;
  int q_;
};

/// Tensor-product taper chi_R(t) = prod_r phi(t_r / R); Q Simpson subintervals.
struct TaperSpec {
  double radius = 2.0;
  int subintervals = 400;

  void validate() const;
};

/// phi(u) = exp(-1 / (1 - u^2)) on |u| < 1, zero elsewhere.
double bump(double u) noexcept;

/// Composite Simpson approximation of \int_{-1}^{1} cos(w u) phi(u) du.
double bump_hat(double w, int subintervals);

/// R^4 prod_r bump_hat(R xi_r).
double taper_hat(const Vec4& xi, const TaperSpec& spec);

/// K(d) = taper_hat(h_xi d).
double kernel(const IVec4& d, const FreqLattice& lattice, const TaperSpec& spec);

/// The sampled kernel K for one (lattice, taper) configuration.
///
/// K factorises over axes, so only the 1-D factor R bump_hat(R h_xi d) is
/// tabulated (d in [-(2M-1), 2M-1]); the torus tensor and its spectra for K and
/// K^2 are built once at construction and are immutable afterwards.
class TaperKernel {
 public:
  TaperKernel(const FreqLattice& lattice, const TaperSpec& spec);

  const FreqLattice& lattice() const noexcept { return lattice_; }
  const TaperSpec& spec() const noexcept { return spec_; }

  /// R bump_hat(R h_xi d) for |d| <= 2M - 1.
  double axis_factor(int d) const;
  /// K(d) for a difference with every |d_a| <= 2M - 1.
  double value(const IVec4& d) const;
  /// K(d mod 2M) with d reduced to its signed torus representative.
  double torus_value(const IVec4& d) const;

  /// Kernel on the 2M torus, position d mod 2M holding K(signed d).
  const ComplexTensor4& torus() const noexcept { return torus_; }
  /// Kernel on {-(2M-1), ..., 2M-1}^4 in the centred layout of convolve().
  ComplexTensor4 centred(bool squared = false) const;

  const CircularConvolver& circular() const noexcept { return circular_; }
  const CircularConvolver& circular_squared() const noexcept { return circular_squared_; }

  /// Copy with the torus entry at difference d negated (fault injection).
  TaperKernel with_negated_entry(const IVec4& d) const;

  /// c_chi = h_xi^4 sum_d |K(d)|^2 over the torus, the discrete \int |chi_hat|^2.
  double c_chi() const;

 private:
  TaperKernel(const FreqLattice& lattice, const TaperSpec& spec, std::vector<double> factors,
              ComplexTensor4 torus);
  static ComplexTensor4 squared(const ComplexTensor4& t);

  FreqLattice lattice_;
  TaperSpec spec_;
  std::vector<double> factors_;  // index d + 2M - 1
  ComplexTensor4 torus_;
  CircularConvolver circular_;
  CircularConvolver circular_squared_;
};

}  // namespace matern4d
