#include "matern4d/spectral_simulator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace matern4d {

SimConfig SimConfig::matched_experiment(double alpha2) {
  SimConfig c;
  c.pair = ModelPair::matched(1.0, 1.0, alpha2, 1.5);
  return c;
}

Complex CoefficientField::at(const IVec4& k, const FreqLattice& lattice) const {
  return X[lattice.offset_of(k)];
}

template <class T>
Tensor4<T> roll_half(const Tensor4<T>& t) {
  const Shape4& s = t.shape();
  Tensor4<T> out(s);
  for (std::size_t i = 0; i < s[0]; ++i)
    for (std::size_t j = 0; j < s[1]; ++j)
      for (std::size_t k = 0; k < s[2]; ++k)
        for (std::size_t l = 0; l < s[3]; ++l)
          out((i + s[0] / 2) % s[0], (j + s[1] / 2) % s[1], (k + s[2] / 2) % s[2], (l + s[3] / 2) % s[3]) =
              t(i, j, k, l);
  return out;
}

template RealTensor4 roll_half(const RealTensor4&);
template ComplexTensor4 roll_half(const ComplexTensor4&);

ComplexTensor4 draw_hermitian(const Shape4& shape, RngStream& rng) {
  ComplexTensor4 g(shape);
  const double half = std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < shape[0]; ++i) {
    const std::size_t ni = (shape[0] - i) % shape[0];
    for (std::size_t j = 0; j < shape[1]; ++j) {
      const std::size_t nj = (shape[1] - j) % shape[1];
      for (std::size_t k = 0; k < shape[2]; ++k) {
        const std::size_t nk = (shape[2] - k) % shape[2];
        for (std::size_t l = 0; l < shape[3]; ++l) {
          const std::size_t nl = (shape[3] - l) % shape[3];
          const std::size_t self = g.offset(i, j, k, l);
          const std::size_t mirror = g.offset(ni, nj, nk, nl);
          if (self == mirror) {
            g[self] = Complex(rng.normal(), 0.0);
          } else if (self < mirror) {
            const double re = rng.normal() * half;
            const double im = rng.normal() * half;
            g[self] = Complex(re, im);
            g[mirror] = Complex(re, -im);
          }
        }
      }
    }
  }
  return g;
}

ComplexTensor4 draw_hermitian(const FreqLattice& lattice, RngStream& rng) {
  return draw_hermitian(lattice.shape(), rng);
}

RealTensor4 density_on_lattice(const MaternParams& model, const FreqLattice& lattice) {
  RealTensor4 f = lattice.frequency_norm2();
  for (double& x : f.values()) x = spectral_density_norm2(x, model, SpectralMode::unit_constant);
  return f;
}

namespace {

RealTensor4 amplitude(const MaternParams& model, const FreqLattice& lattice) {
  RealTensor4 a = density_on_lattice(model, lattice);
  const double h2 = lattice.spacing() * lattice.spacing();
  for (double& x : a.values()) x = h2 * std::sqrt(x);
  return a;
}

void require_lattice_shape(const ComplexTensor4& t, const FreqLattice& lattice, const char* where) {
  if (t.shape() != lattice.shape()) {
    throw std::invalid_argument(std::string(where) + ": tensor shape does not match the lattice");
  }
}

ComplexTensor4 to_complex(const RealTensor4& r) {
  ComplexTensor4 c(r.shape());
  for (std::size_t i = 0; i < r.size(); ++i) c[i] = Complex(r[i], 0.0);
  return c;
}

// Linear convolution over the box I_M, input and output torus-indexed.
ComplexTensor4 padded_on_lattice(const ComplexTensor4& signal, const ComplexTensor4& centred_kernel) {
  return roll_half(convolve(roll_half(signal), centred_kernel, ConvMode::padded_linear));
}

}  // namespace

ComplexTensor4 spectral_field(const ComplexTensor4& G, const MaternParams& model, const FreqLattice& lattice) {
  require_lattice_shape(G, lattice, "spectral_field");
  const RealTensor4 a = amplitude(model, lattice);
  ComplexTensor4 z = G;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= a[i];
  return z;
}

ComplexTensor4 localized_coeffs(const ComplexTensor4& Z, const TaperKernel& kernel, ConvMode mode) {
  require_lattice_shape(Z, kernel.lattice(), "localized_coeffs");
  if (mode == ConvMode::circular) return kernel.circular().apply(Z);
  return padded_on_lattice(Z, kernel.centred());
}

RealTensor4 variance_curve(const MaternParams& model, const TaperKernel& kernel, ConvMode mode) {
  const FreqLattice& lattice = kernel.lattice();
  const ComplexTensor4 f = to_complex(density_on_lattice(model, lattice));
  const ComplexTensor4 conv = mode == ConvMode::circular ? kernel.circular_squared().apply(f)
                                                         : padded_on_lattice(f, kernel.centred(true));
  const double h = lattice.spacing();
  const double h4 = h * h * h * h;
  RealTensor4 v(conv.shape());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = h4 * conv[i].real();
    if (!(v[i] > 0.0)) {
      throw std::logic_error("variance_curve: nonpositive variance " + std::to_string(v[i]) +
                             " (convolution misuse)");
    }
  }
  return v;
}

std::pair<Complex, Complex> cross_cov_discrete(const IVec4& k, const IVec4& l, const MaternParams& model,
                                               const TaperKernel& kernel, ConvMode mode) {
  const FreqLattice& lattice = kernel.lattice();
  if (!lattice.representable(k) || !lattice.representable(l)) {
    throw std::out_of_range("cross_cov_discrete: frequency not representable on the lattice");
  }
  const auto n = static_cast<std::size_t>(lattice.side());
  const int q = lattice.q();
  // Per-axis factors of K(qk - r), K(ql - r) and K(ql - r*), where r* is the
  // torus negation of r (equal to -r except on the -M face).
  std::array<std::vector<double>, 4> a, b, c;
  auto factor = [&](int d) {
    if (mode == ConvMode::circular) {
      return kernel.axis_factor(lattice.signed_index(lattice.position(d)));
    }
    return kernel.axis_factor(d);
  };
  for (int ax = 0; ax < 4; ++ax) {
    a[ax].resize(n);
    b[ax].resize(n);
    c[ax].resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const int r = lattice.signed_index(t);
      a[ax][t] = factor(q * k[ax] - r);
      b[ax][t] = factor(q * l[ax] - r);
      const int r_star = lattice.signed_index(lattice.position(-r));
      c[ax][t] = factor(q * l[ax] - r_star);
    }
  }
  const RealTensor4 f = density_on_lattice(model, lattice);
  double sigma = 0.0;
  double pi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t kk = 0; kk < n; ++kk) {
        const double ka = a[0][i] * a[1][j] * a[2][kk];
        const double kb = b[0][i] * b[1][j] * b[2][kk];
        const double kc = c[0][i] * c[1][j] * c[2][kk];
        for (std::size_t ll = 0; ll < n; ++ll) {
          const double w = f(i, j, kk, ll) * ka * a[3][ll];
          sigma += w * kb * b[3][ll];
          pi += w * kc * c[3][ll];
        }
      }
  const double h = lattice.spacing();
  const double h4 = h * h * h * h;
  return {Complex(h4 * sigma, 0.0), Complex(h4 * pi, 0.0)};
}

RealTensor4 cross_cov_row(const IVec4& k, const MaternParams& model, const TaperKernel& kernel) {
  const FreqLattice& lattice = kernel.lattice();
  if (!lattice.representable(k)) throw std::out_of_range("cross_cov_row: k not representable");
  const RealTensor4 f = density_on_lattice(model, lattice);
  const auto n = static_cast<std::size_t>(lattice.side());
  ComplexTensor4 g(f.shape());
  const int q = lattice.q();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t kk = 0; kk < n; ++kk)
        for (std::size_t ll = 0; ll < n; ++ll) {
          const IVec4 d{q * k[0] - lattice.signed_index(i), q * k[1] - lattice.signed_index(j),
                        q * k[2] - lattice.signed_index(kk), q * k[3] - lattice.signed_index(ll)};
          g(i, j, kk, ll) = f(i, j, kk, ll) * kernel.torus_value(d);
        }
  kernel.circular().apply_inplace(g);
  const double h = lattice.spacing();
  RealTensor4 out(g.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h * h * h * h * g[i].real();
  return out;
}

SpectralSimulator::SpectralSimulator(const SimConfig& config)
    : SpectralSimulator(config, TaperKernel(config.lattice, config.taper)) {}

SpectralSimulator::SpectralSimulator(const SimConfig& config, TaperKernel kernel)
    : config_(config), kernel_(std::move(kernel)) {
  const MaternParams* models[2] = {&config_.pair.model1, &config_.pair.model2};
  for (int j = 0; j < 2; ++j) {
    amplitude_[j] = amplitude(*models[j], config_.lattice);
    variance_[j] = variance_curve(*models[j], kernel_, config_.conv_mode);
  }
}

const MaternParams& SpectralSimulator::model(int tag) const {
  if (tag == 1) return config_.pair.model1;
  if (tag == 2) return config_.pair.model2;
  throw std::invalid_argument("model tag must be 1 or 2");
}

const RealTensor4& SpectralSimulator::variance(int tag) const {
  model(tag);
  return variance_[tag - 1];
}

CoefficientField SpectralSimulator::simulate(int tag, std::uint64_t replicate) const {
  model(tag);
  const auto domain = tag == 1 ? StreamDomain::tn_model1 : StreamDomain::tn_model2;
  RngStream rng = RngStream::derive(config_.master_seed, domain, replicate);
  return simulate_with(tag, rng);
}

CoefficientField SpectralSimulator::simulate_with(int tag, RngStream& rng) const {
  model(tag);
  CoefficientField field{draw_hermitian(config_.lattice, rng), tag, rng.seed()};
  ComplexTensor4& x = field.X;
  const RealTensor4& a = amplitude_[tag - 1];
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= a[i];
  if (config_.conv_mode == ConvMode::circular) {
    kernel_.circular().apply_inplace(x);
  } else {
    x = localized_coeffs(x, kernel_, ConvMode::padded_linear);
  }
  return field;
}

}  // namespace matern4d
