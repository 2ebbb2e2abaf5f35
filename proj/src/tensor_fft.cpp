#include "matern4d/tensor_fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

namespace matern4d {

namespace {

// FFTW planning is not thread-safe, execution on new arrays is. Plans are
// created once per (shape, direction) with FFTW_ESTIMATE | FFTW_UNALIGNED so
// that the same codelets run for every buffer and results are reproducible.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const Shape4& shape, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    std::vector<Complex> scratch(n);
    const int dims[4] = {static_cast<int>(shape[0]), static_cast<int>(shape[1]),
                         static_cast<int>(shape[2]), static_cast<int>(shape[3])};
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(4, dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<Shape4, int>, fftw_plan> plans_;
};

void execute(ComplexTensor4& t, int sign) {
  fftw_plan plan = PlanCache::instance().get(t.shape(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(t.data());
  fftw_execute_dft(plan, buf, buf);
}

Shape4 padded_shape(const Shape4& signal) {
  Shape4 out{};
  for (std::size_t a = 0; a < 4; ++a) out[a] = 2 * signal[a];
  return out;
}

}  // namespace

void require_finite(const ComplexTensor4& t, const char* where) {
  for (const Complex& z : t.values()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::runtime_error(std::string(where) + ": non-finite tensor entry");
    }
  }
}

void dft_forward_inplace(ComplexTensor4& t) {
  execute(t, FFTW_FORWARD);
  require_finite(t, "dft_forward");
}

void dft_inverse_inplace(ComplexTensor4& t) {
  execute(t, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(t.size());
  for (Complex& z : t.values()) z *= scale;
  require_finite(t, "dft_inverse");
}

ComplexTensor4 dft_forward(const ComplexTensor4& t) {
  ComplexTensor4 out = t;
  dft_forward_inplace(out);
  return out;
}

ComplexTensor4 dft_inverse(const ComplexTensor4& t) {
  ComplexTensor4 out = t;
  dft_inverse_inplace(out);
  return out;
}

CircularConvolver::CircularConvolver(const ComplexTensor4& kernel) : spectrum_(dft_forward(kernel)) {}

void CircularConvolver::apply_inplace(ComplexTensor4& signal) const {
  if (signal.shape() != spectrum_.shape()) {
    throw std::invalid_argument("convolve: signal and kernel shapes differ");
  }
  dft_forward_inplace(signal);
  const std::size_t n = signal.size();
  for (std::size_t i = 0; i < n; ++i) signal[i] *= spectrum_[i];
  dft_inverse_inplace(signal);
}

ComplexTensor4 CircularConvolver::apply(const ComplexTensor4& signal) const {
  ComplexTensor4 out = signal;
  apply_inplace(out);
  return out;
}

ComplexTensor4 convolve(const ComplexTensor4& signal, const ComplexTensor4& kernel, ConvMode mode) {
  if (mode == ConvMode::circular) {
    if (signal.shape() != kernel.shape()) {
      throw std::invalid_argument("convolve: circular mode needs equal shapes");
    }
    return CircularConvolver(kernel).apply(signal);
  }

  const Shape4& s = signal.shape();
  for (std::size_t a = 0; a < 4; ++a) {
    if (kernel.extent(a) != 2 * s[a] - 1) {
      throw std::invalid_argument("convolve: padded_linear kernel extent must be 2n-1 per axis");
    }
  }
  const Shape4 p = padded_shape(s);
  ComplexTensor4 sig(p);
  for (std::size_t i = 0; i < s[0]; ++i)
    for (std::size_t j = 0; j < s[1]; ++j)
      for (std::size_t k = 0; k < s[2]; ++k)
        for (std::size_t l = 0; l < s[3]; ++l) sig(i, j, k, l) = signal(i, j, k, l);

  // Difference d lives at kernel index d + n - 1 and at padded index d mod P.
  ComplexTensor4 ker(p);
  const Shape4& ks = kernel.shape();
  auto centred = [&](std::size_t idx, std::size_t a) {
    return static_cast<long long>(idx) - static_cast<long long>(s[a] - 1);
  };
  for (std::size_t i = 0; i < ks[0]; ++i)
    for (std::size_t j = 0; j < ks[1]; ++j)
      for (std::size_t k = 0; k < ks[2]; ++k)
        for (std::size_t l = 0; l < ks[3]; ++l)
          ker.wrapped({centred(i, 0), centred(j, 1), centred(k, 2), centred(l, 3)}) = kernel(i, j, k, l);

  CircularConvolver(ker).apply_inplace(sig);

  ComplexTensor4 out(s);
  for (std::size_t i = 0; i < s[0]; ++i)
    for (std::size_t j = 0; j < s[1]; ++j)
      for (std::size_t k = 0; k < s[2]; ++k)
        for (std::size_t l = 0; l < s[3]; ++l) out(i, j, k, l) = sig(i, j, k, l);
  return out;
}

}  // namespace matern4d
