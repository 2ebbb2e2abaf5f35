#include "matern4d/taper_lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace matern4d {

FreqLattice::FreqLattice(int half_width, int q) : half_width_(half_width), q_(q) {
  if (half_width < 1) throw std::invalid_argument("FreqLattice: M must be a positive integer");
  if (q < 1) throw std::invalid_argument("FreqLattice: q must be a positive integer");
}

Shape4 FreqLattice::shape() const noexcept {
  const auto n = static_cast<std::size_t>(side());
  return {n, n, n, n};
}

std::size_t FreqLattice::position(int n) const noexcept {
  const int s = side();
  const int r = n % s;
  return static_cast<std::size_t>(r < 0 ? r + s : r);
}

int FreqLattice::signed_index(std::size_t position) const noexcept {
  const int t = static_cast<int>(position);
  return t < half_width_ ? t : t - side();
}

bool FreqLattice::representable(const IVec4& k) const noexcept {
  for (int c : k) {
    const long long n = static_cast<long long>(q_) * c;
    if (n < -half_width_ || n > half_width_ - 1) return false;
  }
  return true;
}

std::size_t FreqLattice::offset_of(const IVec4& k) const {
  if (!representable(k)) {
    throw std::out_of_range("integer frequency (" + std::to_string(k[0]) + "," + std::to_string(k[1]) +
                            "," + std::to_string(k[2]) + "," + std::to_string(k[3]) +
                            ") is not representable on the lattice");
  }
  const auto n = static_cast<std::size_t>(side());
  std::size_t off = 0;
  for (int c : k) off = off * n + position(q_ * c);
  return off;
}

RealTensor4 FreqLattice::frequency_norm2() const {
  const auto n = static_cast<std::size_t>(side());
  std::vector<double> sq(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double xi = signed_index(t) * spacing();
    sq[t] = xi * xi;
  }
  RealTensor4 out(shape());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) out(i, j, k, l) = sq[i] + sq[j] + sq[k] + sq[l];
  return out;
}

void TaperSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("TaperSpec: radius R must be positive");
  }
  if (subintervals < 2 || subintervals % 2 != 0) {
    throw std::invalid_argument("TaperSpec: Simpson subintervals Q must be even and >= 2");
  }
}

double bump(double u) noexcept {
  if (!(std::abs(u) < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double bump_hat(double w, int subintervals) {
  if (subintervals < 2 || subintervals % 2 != 0) {
    throw std::invalid_argument("bump_hat: Q must be even and >= 2");
  }
  // Even integrand: the sine part cancels on the symmetric nodes.
  const double aw = std::abs(w);
  const double step = 2.0 / subintervals;
  double sum = 0.0;  // endpoints contribute phi(+-1) = 0
  for (int i = 1; i < subintervals; ++i) {
    const double u = -1.0 + i * step;
    const double weight = (i % 2 == 1) ? 4.0 : 2.0;
    sum += weight * std::cos(aw * u) * bump(u);
  }
  return sum * step / 3.0;
}

double taper_hat(const Vec4& xi, const TaperSpec& spec) {
  spec.validate();
  double out = 1.0;
  for (double c : xi) out *= spec.radius * bump_hat(spec.radius * c, spec.subintervals);
  return out;
}

double kernel(const IVec4& d, const FreqLattice& lattice, const TaperSpec& spec) {
  const double h = lattice.spacing();
  return taper_hat({h * d[0], h * d[1], h * d[2], h * d[3]}, spec);
}

namespace {

std::vector<double> tabulate_factors(const FreqLattice& lattice, const TaperSpec& spec) {
  spec.validate();
  const int reach = lattice.side() - 1;
  std::vector<double> factors(2 * reach + 1);
  for (int d = 0; d <= reach; ++d) {
    const double v = spec.radius * bump_hat(spec.radius * lattice.spacing() * d, spec.subintervals);
    factors[reach + d] = v;
    factors[reach - d] = v;
  }
  return factors;
}

ComplexTensor4 torus_tensor(const FreqLattice& lattice, const std::vector<double>& factors) {
  const auto n = static_cast<std::size_t>(lattice.side());
  const int reach = lattice.side() - 1;
  std::vector<double> axis(n);
  for (std::size_t t = 0; t < n; ++t) axis[t] = factors[reach + lattice.signed_index(t)];
  ComplexTensor4 out(lattice.shape());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double ijk = axis[i] * axis[j] * axis[k];
        for (std::size_t l = 0; l < n; ++l) out(i, j, k, l) = ijk * axis[l];
      }
  return out;
}

}  // namespace

TaperKernel::TaperKernel(const FreqLattice& lattice, const TaperSpec& spec)
    : TaperKernel(lattice, spec, tabulate_factors(lattice, spec), ComplexTensor4{}) {}

TaperKernel::TaperKernel(const FreqLattice& lattice, const TaperSpec& spec, std::vector<double> factors,
                         ComplexTensor4 torus)
    : lattice_(lattice),
      spec_(spec),
      factors_(std::move(factors)),
      torus_(torus.size() == 0 ? torus_tensor(lattice_, factors_) : std::move(torus)),
      circular_(torus_),
      circular_squared_(squared(torus_)) {}

ComplexTensor4 TaperKernel::squared(const ComplexTensor4& t) {
  ComplexTensor4 out = t;
  for (Complex& z : out.values()) z = Complex(std::norm(z), 0.0);
  return out;
}

double TaperKernel::axis_factor(int d) const {
  const int reach = lattice_.side() - 1;
  if (d < -reach || d > reach) throw std::out_of_range("TaperKernel: difference outside tabulated range");
  return factors_[static_cast<std::size_t>(d + reach)];
}

double TaperKernel::value(const IVec4& d) const {
  return axis_factor(d[0]) * axis_factor(d[1]) * axis_factor(d[2]) * axis_factor(d[3]);
}

double TaperKernel::torus_value(const IVec4& d) const {
  const auto& t = torus_;
  return t.wrapped({d[0], d[1], d[2], d[3]}).real();
}

ComplexTensor4 TaperKernel::centred(bool squared_values) const {
  const int reach = lattice_.side() - 1;
  const auto n = static_cast<std::size_t>(2 * reach + 1);
  ComplexTensor4 out = ComplexTensor4::cube(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double ijk = factors_[i] * factors_[j] * factors_[k];
        for (std::size_t l = 0; l < n; ++l) {
          const double v = ijk * factors_[l];
          out(i, j, k, l) = squared_values ? v * v : v;
        }
      }
  return out;
}

TaperKernel TaperKernel::with_negated_entry(const IVec4& d) const {
  ComplexTensor4 torus = torus_;
  torus.wrapped({d[0], d[1], d[2], d[3]}) *= -1.0;
  return TaperKernel(lattice_, spec_, factors_, std::move(torus));
}

double TaperKernel::c_chi() const {
  double s = 0.0;
  for (const Complex& z : torus_.values()) s += std::norm(z);
  const double h = lattice_.spacing();
  return s * h * h * h * h;
}

}  // namespace matern4d
