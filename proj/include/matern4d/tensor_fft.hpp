#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace matern4d {

using Complex = std::complex<double>;
using Shape4 = std::array<std::size_t, 4>;

/// Rank-4 array with contiguous row-major storage (last axis fastest).
template <class T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(const Shape4& shape, T fill = T{})
      : shape_(shape), data_(checked_size(shape), fill) {}

  static Tensor4 cube(std::size_t n, T fill = T{}) { return Tensor4({n, n, n, n}, fill); }

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
    return ((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) noexcept {
    return data_[offset(i, j, k, l)];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
    return data_[offset(i, j, k, l)];
  }

  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  /// Element at index (wrapped per axis, so negative indices address the torus).
  const T& wrapped(const std::array<long long, 4>& idx) const noexcept {
    return data_[offset(wrap(idx[0], 0), wrap(idx[1], 1), wrap(idx[2], 2), wrap(idx[3], 3))];
  }
  T& wrapped(const std::array<long long, 4>& idx) noexcept {
    return data_[offset(wrap(idx[0], 0), wrap(idx[1], 1), wrap(idx[2], 2), wrap(idx[3], 3))];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const Tensor4&) const = default;

 private:
  static std::size_t checked_size(const Shape4& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
      if (e == 0) throw std::invalid_argument("Tensor4: every extent must be positive");
      n *= e;
    }
    return n;
  }

  std::size_t wrap(long long i, std::size_t axis) const noexcept {
    const auto n = static_cast<long long>(shape_[axis]);
    const long long r = i % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }

  Shape4 shape_{};
  std::vector<T> data_;
};

using ComplexTensor4 = Tensor4<Complex>;
using RealTensor4 = Tensor4<double>;

enum class ConvMode { circular, padded_linear };

/// Unnormalised forward DFT: out[k] = sum_j t[j] exp(-2 pi i <k, j/n>).
ComplexTensor4 dft_forward(const ComplexTensor4& t);

/// Inverse DFT with 1/N scaling, so dft_inverse(dft_forward(x)) == x.
ComplexTensor4 dft_inverse(const ComplexTensor4& t);

/// In-place variants used by the hot paths; same conventions as above.
void dft_forward_inplace(ComplexTensor4& t);
void dft_inverse_inplace(ComplexTensor4& t);

/// Discrete convolution of `signal` with `kernel`.
///
/// circular: shapes must match; kernel[d mod n] holds the value at difference d
///   and out[n] = sum_r kernel[(n - r) mod shape] signal[r].
/// padded_linear: kernel has extent 2 n_a - 1 per axis with the value at
///   difference d stored at index d + n_a - 1; out[n] = sum_{r in box}
///   kernel(n - r) signal[r] for n in the signal box. Computed on a zero-padded
///   grid so no wrap-around occurs.
ComplexTensor4 convolve(const ComplexTensor4& signal, const ComplexTensor4& kernel, ConvMode mode);

/// Circular convolution against a fixed kernel whose spectrum is computed once.
class CircularConvolver {
 public:
  explicit CircularConvolver(const ComplexTensor4& kernel);

  const Shape4& shape() const noexcept { return spectrum_.shape(); }
  const ComplexTensor4& spectrum() const noexcept { return spectrum_; }

  ComplexTensor4 apply(const ComplexTensor4& signal) const;
  /// Overwrites `signal` with the convolution.
  void apply_inplace(ComplexTensor4& signal) const;

 private:
  ComplexTensor4 spectrum_;
};

/// Throws std::runtime_error if any entry is NaN or infinite.
void require_finite(const ComplexTensor4& t, const char* where);

}  // namespace matern4d
