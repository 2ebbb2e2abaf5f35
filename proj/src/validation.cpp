#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>

#include "matern4d/cli_harness.hpp"
#include "matern4d/parallel.hpp"
#include "matern4d/score_statistic.hpp"
#include "report_io.hpp"

namespace matern4d {

using detail::Json;

namespace {

constexpr double kOracleTol = 1e-10;
constexpr int kSmallM = 6;
constexpr int kSmallObs = 4;

struct Suite {
  const RunConfig& config;
  RunReport& report;
  std::string name;

  void check(const std::string& what, bool ok, double value, double threshold, std::string detail = {}) {
    report.checks.push_back({name, what, ok, value, threshold, std::move(detail)});
  }
};

double max_abs(std::span<const Complex> v) {
  double m = 0.0;
  for (const Complex& z : v) m = std::max(m, std::abs(z));
  return m;
}

double rel_error(std::span<const Complex> fast, std::span<const Complex> direct) {
  double err = 0.0;
  for (std::size_t i = 0; i < fast.size(); ++i) err = std::max(err, std::abs(fast[i] - direct[i]));
  const double scale = max_abs(direct);
  return scale > 0.0 ? err / scale : err;
}

ComplexTensor4 random_complex(const Shape4& shape, RngStream& rng) {
  ComplexTensor4 t(shape);
  for (Complex& z : t.values()) {
    const double re = rng.normal();
    z = Complex(re, rng.normal());
  }
  return t;
}

ComplexTensor4 direct_circular(const ComplexTensor4& s, const ComplexTensor4& k) {
  const Shape4& n = s.shape();
  ComplexTensor4 out(n);
  for (std::size_t a = 0; a < n[0]; ++a)
    for (std::size_t b = 0; b < n[1]; ++b)
      for (std::size_t c = 0; c < n[2]; ++c)
        for (std::size_t d = 0; d < n[3]; ++d) {
          Complex acc = 0.0;
          for (std::size_t i = 0; i < n[0]; ++i)
            for (std::size_t j = 0; j < n[1]; ++j)
              for (std::size_t l = 0; l < n[2]; ++l)
                for (std::size_t m = 0; m < n[3]; ++m)
                  acc += k((a + n[0] - i) % n[0], (b + n[1] - j) % n[1], (c + n[2] - l) % n[2],
                           (d + n[3] - m) % n[3]) *
                         s(i, j, l, m);
          out(a, b, c, d) = acc;
        }
  return out;
}

ComplexTensor4 direct_padded(const ComplexTensor4& s, const ComplexTensor4& k) {
  const Shape4& n = s.shape();
  ComplexTensor4 out(n);
  for (std::size_t a = 0; a < n[0]; ++a)
    for (std::size_t b = 0; b < n[1]; ++b)
      for (std::size_t c = 0; c < n[2]; ++c)
        for (std::size_t d = 0; d < n[3]; ++d) {
          Complex acc = 0.0;
          for (std::size_t i = 0; i < n[0]; ++i)
            for (std::size_t j = 0; j < n[1]; ++j)
              for (std::size_t l = 0; l < n[2]; ++l)
                for (std::size_t m = 0; m < n[3]; ++m)
                  acc += k(a + n[0] - 1 - i, b + n[1] - 1 - j, c + n[2] - 1 - l, d + n[3] - 1 - m) * s(i, j, l, m);
          out(a, b, c, d) = acc;
        }
  return out;
}

// h^4 sum_r f(r) K(n - r)^2 with the per-axis factor table t[n][r] = K_axis(n - r).
RealTensor4 direct_variance(const RealTensor4& f, const std::vector<std::vector<double>>& t, double h) {
  const std::size_t n = t.size();
  RealTensor4 out(f.shape());
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              for (std::size_t l = 0; l < n; ++l) {
                const double w = t[a][i] * t[b][j] * t[c][l];
                const double w2 = w * w;
                for (std::size_t m = 0; m < n; ++m) acc += f(i, j, l, m) * w2 * t[d][m] * t[d][m];
              }
          out(a, b, c, d) = h * h * h * h * acc;
        }
  return out;
}

std::vector<Complex> as_complex(const RealTensor4& r) {
  std::vector<Complex> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) v[i] = r[i];
  return v;
}

void suite_fft(Suite s) {
  const RunConfig& c = s.config;
  RngStream rng = RngStream::derive(c.seed, StreamDomain::validation, 0);

  const Shape4 odd{6, 5, 4, 7};
  const ComplexTensor4 sig = random_complex(odd, rng);
  const ComplexTensor4 ker = random_complex(odd, rng);
  double e = rel_error(convolve(sig, ker, ConvMode::circular).values(), direct_circular(sig, ker).values());
  s.check("circular_convolution", e <= kOracleTol, e, kOracleTol);

  const ComplexTensor4 ker_lin = random_complex({11, 9, 7, 13}, rng);
  e = rel_error(convolve(sig, ker_lin, ConvMode::padded_linear).values(), direct_padded(sig, ker_lin).values());
  s.check("padded_convolution", e <= kOracleTol, e, kOracleTol);

  const FreqLattice lattice(kSmallM, c.q);
  const TaperKernel kernel(lattice, c.taper);
  const MaternParams model = c.pair().model1;
  const RealTensor4 f = density_on_lattice(model, lattice);
  const auto n = static_cast<std::size_t>(lattice.side());
  for (ConvMode mode : {ConvMode::circular, ConvMode::padded_linear}) {
    std::vector<std::vector<double>> t(n, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t r = 0; r < n; ++r) {
        const int d = lattice.signed_index(a) - lattice.signed_index(r);
        t[a][r] = kernel.axis_factor(mode == ConvMode::circular ? lattice.signed_index(lattice.position(d)) : d);
      }
    const RealTensor4 direct = direct_variance(f, t, lattice.spacing());
    const RealTensor4 fast = variance_curve(model, kernel, mode);
    e = rel_error(as_complex(fast), as_complex(direct));
    s.check(mode == ConvMode::circular ? "variance_curve_circular" : "variance_curve_padded", e <= kOracleTol, e,
            kOracleTol);
  }

  // Grid DFT coefficients and u_alpha against their defining sums.
  const int no = kSmallObs;
  const ObsGrid grid(no);
  RealTensor4 field(grid.shape());
  for (double& x : field.values()) x = rng.normal();
  const GridCoefficients fast = dft_coeffs(field, no);
  std::vector<Complex> roots(static_cast<std::size_t>(no));
  for (int t = 0; t < no; ++t) roots[static_cast<std::size_t>(t)] = std::polar(1.0, -2.0 * std::numbers::pi * t / no);
  const double h4 = std::pow(grid.h(), 4);
  ComplexTensor4 direct_z(grid.shape());
  for (std::size_t k = 0; k < direct_z.size(); ++k) {
    const std::size_t ka[4] = {k / (no * no * no), k / (no * no) % no, k / no % no, k % no};
    Complex acc = 0.0;
    for (std::size_t j = 0; j < field.size(); ++j) {
      const std::size_t ja[4] = {j / (no * no * no), j / (no * no) % no, j / no % no, j % no};
      std::size_t phase = 0;
      for (int a = 0; a < 4; ++a) phase += ka[a] * ja[a];
      acc += field[j] * roots[phase % no];
    }
    direct_z[k] = h4 * acc;
  }
  e = rel_error(fast.Z.values(), direct_z.values());
  s.check("dft_coefficients", e <= kOracleTol, e, kOracleTol);

  const RealTensor4 u = u_alpha(c.whittle.alpha, c.whittle.nu, no);
  std::vector<Complex> direct_u(u.size());
  const double h8 = h4 * h4;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const int ka[4] = {static_cast<int>(k / (no * no * no)), static_cast<int>(k / (no * no) % no),
                       static_cast<int>(k / no % no), static_cast<int>(k % no)};
    Complex acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
      for (std::size_t jp = 0; jp < u.size(); ++jp) {
        const std::size_t x[2] = {j, jp};
        int ax[2][4];
        for (int w = 0; w < 2; ++w) {
          ax[w][0] = static_cast<int>(x[w] / (no * no * no));
          ax[w][1] = static_cast<int>(x[w] / (no * no) % no);
          ax[w][2] = static_cast<int>(x[w] / no % no);
          ax[w][3] = static_cast<int>(x[w] % no);
        }
        IVec4 r;
        int phase = 0;
        for (int a = 0; a < 4; ++a) {
          r[a] = ax[0][a] - ax[1][a];
          phase += ka[a] * r[a];
        }
        const int p = ((phase % no) + no) % no;
        acc += grid_covariance(r, c.whittle.alpha, c.whittle.nu, no) * roots[static_cast<std::size_t>(p)];
      }
    direct_u[k] = h8 * acc;
  }
  e = rel_error(as_complex(u), direct_u);
  s.check("u_alpha", e <= kOracleTol, e, kOracleTol);
}

TaperKernel configured_kernel(const RunConfig& c, const FreqLattice& lattice) {
  TaperKernel k(lattice, c.taper);
  if (c.validate.corrupt_kernel) return k.with_negated_entry({1, 0, 0, 0});
  return k;
}

void suite_hermitian(Suite s) {
  const RunConfig& c = s.config;
  const SimConfig sim_cfg = c.sim_config();
  const SpectralSimulator sim(sim_cfg, configured_kernel(c, sim_cfg.lattice));
  RngStream rng = RngStream::derive(c.seed, StreamDomain::validation, 1);
  const CoefficientField field = sim.simulate_with(1, rng);
  const ComplexTensor4& x = field.X;
  const Shape4& n = x.shape();
  double err = 0.0;
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t l = 0; l < n[3]; ++l) {
          const Complex mirror = x((n[0] - i) % n[0], (n[1] - j) % n[1], (n[2] - k) % n[2], (n[3] - l) % n[3]);
          err = std::max(err, std::abs(x(i, j, k, l) - std::conj(mirror)));
        }
  err /= max_abs(x.values());
  constexpr double tol = 1e-12;
  s.check("coefficients", err <= tol, err, tol, "max |X_-n - conj X_n| / max |X|");
}

// The outer layer |k|_inf = K1 of the shell, or nullopt with a failed check.
std::optional<Shell> outer_layer(Suite& s, const FreqLattice& lattice) {
  try {
    return shell_indices(s.config.K1, s.config.K1, lattice);
  } catch (const std::invalid_argument& e) {
    s.check("outer_layer", false, 0.0, 0.0, e.what());
    return std::nullopt;
  }
}

struct BandStats {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t inside = 0;
  std::size_t count = 0;

  void add(double x, double a, double b) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    ++count;
    if (x >= a && x <= b) ++inside;
  }
  std::string detail() const {
    return "min " + format_double(lo) + ", max " + format_double(hi) + ", " + std::to_string(inside) + " of " +
           std::to_string(count) + " in band";
  }
  // Largest excursion outside [a, b]; zero when everything is inside.
  double excursion(double a, double b) const { return std::max({0.0, a - lo, hi - b}); }
};

void suite_ratio(Suite s) {
  const RunConfig& c = s.config;
  const SimConfig sim_cfg = c.sim_config();
  const TaperKernel kernel(sim_cfg.lattice, c.taper);
  const auto layer = outer_layer(s, sim_cfg.lattice);
  if (!layer) return;
  const double cchi = kernel.c_chi();
  const MaternParams models[2] = {sim_cfg.pair.model1, sim_cfg.pair.model2};
  RealTensor4 v[2];
  for (int j = 0; j < 2; ++j) v[j] = variance_curve(models[j], kernel, c.conv_mode);
  constexpr double a = 0.7, b = 1.3;
  BandStats stats[2];
  detail::CsvTable table({"k0", "k1", "k2", "k3", "ratio_model1", "ratio_model2"});
  for (const IVec4& k : layer->indices) {
    const Vec4 xi{double(k[0]), double(k[1]), double(k[2]), double(k[3])};
    std::vector<std::string> row{std::to_string(k[0]), std::to_string(k[1]), std::to_string(k[2]),
                                 std::to_string(k[3])};
    for (int j = 0; j < 2; ++j) {
      const double r = v[j][sim_cfg.lattice.offset_of(k)] / (cchi * spectral_density(xi, models[j]));
      stats[j].add(r, a, b);
      row.push_back(format_double(r));
    }
    table.add(std::move(row));
  }
  const auto path = c.out_dir / "ratio_table.csv";
  detail::write_text(path, table.str());
  s.report.artifacts.push_back(path);
  for (int j = 0; j < 2; ++j) {
    s.check("model" + std::to_string(j + 1) + "_in_band", stats[j].inside == stats[j].count,
            stats[j].excursion(a, b), 0.0, stats[j].detail() + " [0.7, 1.3]");
  }
}

void suite_delta(Suite s) {
  const RunConfig& c = s.config;
  const SimConfig sim_cfg = c.sim_config();
  const TaperKernel kernel(sim_cfg.lattice, c.taper);
  const auto layer = outer_layer(s, sim_cfg.lattice);
  if (!layer) return;
  const RealTensor4 v1 = variance_curve(sim_cfg.pair.model1, kernel, c.conv_mode);
  const RealTensor4 v2 = variance_curve(sim_cfg.pair.model2, kernel, c.conv_mode);
  const auto deltas = delta_from_variances(v1, v2, *layer, sim_cfg.lattice);
  const double a1 = sim_cfg.pair.model1.alpha(), a2 = sim_cfg.pair.model2.alpha();
  const double nu = sim_cfg.pair.model1.nu();
  constexpr double a = 0.6, b = 1.4;
  BandStats stats;
  detail::CsvTable table({"k0", "k1", "k2", "k3", "delta", "delta_analytic", "delta_leading", "ratio"});
  for (std::size_t i = 0; i < layer->size(); ++i) {
    const IVec4& k = layer->indices[i];
    const double lead = delta_leading(k, a1, a2, nu);
    const double r = deltas[i] / lead;
    stats.add(r, a, b);
    table.add({std::to_string(k[0]), std::to_string(k[1]), std::to_string(k[2]), std::to_string(k[3]),
               format_double(deltas[i]), format_double(delta_analytic(k, a1, a2, nu)), format_double(lead),
               format_double(r)});
  }
  const auto path = c.out_dir / "delta_table.csv";
  detail::write_text(path, table.str());
  s.report.artifacts.push_back(path);
  s.check("leading_term_in_band", stats.inside == stats.count, stats.excursion(a, b), 0.0,
          stats.detail() + " [0.6, 1.4]");
}

void suite_growth(Suite s) {
  const RunConfig& c = s.config;
  const ModelPair pair = c.pair();
  const auto rows = ln_growth(c.validate.growth_k0, c.validate.growth_n, pair.model1.alpha(), pair.model2.alpha(),
                              pair.model1.nu());
  const std::size_t n = rows.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(static_cast<double>(rows[i].N));
    y[i] = rows[i].L;
  }
  const auto [mx, vx] = mean_and_variance(x);
  const auto [my, vy] = mean_and_variance(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 0.0;
  detail::CsvTable table({"N", "L_N", "increment_per_log"});
  double worst = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::string inc;
    if (i > 0) {
      const double step = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
      inc = format_double(step);
      if (i > 1) worst = std::max(worst, std::abs(step / prev - 1.0));
      prev = step;
    }
    table.add({std::to_string(rows[i].N), format_double(rows[i].L), inc});
  }
  const auto path = c.out_dir / "growth_table.csv";
  detail::write_text(path, table.str());
  s.report.artifacts.push_back(path);
  s.check("log_fit_r2", r2 >= 0.99, r2, 0.99);
  s.check("positive_slope", slope > 0.0, slope, 0.0);
  s.check("increments_agree", worst <= 0.10, worst, 0.10, "max relative change between successive increments");
}

void suite_decay(Suite s) {
  const RunConfig& c = s.config;
  const SimConfig sim_cfg = c.sim_config();
  const FreqLattice& lattice = sim_cfg.lattice;
  const IVec4 k{3, 0, 0, 0};
  constexpr int reach = 4;
  if (!lattice.representable(k) || !lattice.representable({k[0] + reach, 0, 0, 0})) {
    s.check("ratio_d1_d4", false, 0.0, 10.0, "k = (3,0,0,0) and its distance-4 neighbours need q * 7 <= M - 1");
    return;
  }
  const TaperKernel kernel(lattice, c.taper);
  const MaternParams& model = sim_cfg.pair.model1;
  const RealTensor4 row = cross_cov_row(k, model, kernel);
  const RealTensor4 v = variance_curve(model, kernel, ConvMode::circular);
  const double vk = v[lattice.offset_of(k)];
  auto rho = [&](const IVec4& l) {
    const std::size_t o = lattice.offset_of(l);
    return std::abs(row[o]) / std::sqrt(vk * v[o]);
  };
  double best[reach + 1] = {};
  IVec4 arg[reach + 1] = {};
  const int span = reach;
  for (int a = -span; a <= span; ++a)
    for (int b = -span; b <= span; ++b)
      for (int cc = -span; cc <= span; ++cc)
        for (int d = -span; d <= span; ++d) {
          const IVec4 off{a, b, cc, d};
          const int dist = norm_inf(off);
          if (dist == 0) continue;
          const IVec4 l{k[0] + a, b, cc, d};
          if (!lattice.representable(l)) continue;
          const double r = rho(l);
          if (r > best[dist]) {
            best[dist] = r;
            arg[dist] = l;
          }
        }
  detail::CsvTable table({"distance", "max_rho", "argmax", "rho_diagonal"});
  for (int dist = 1; dist <= reach; ++dist) {
    const IVec4 diag{k[0] + dist, dist, dist, dist};
    table.add({std::to_string(dist), format_double(best[dist]), detail::ivec_str(arg[dist]),
               lattice.representable(diag) ? format_double(rho(diag)) : ""});
  }
  const auto path = c.out_dir / "decay_table.csv";
  detail::write_text(path, table.str());
  s.report.artifacts.push_back(path);
  const double drop = best[1] / best[reach];
  s.check("ratio_d1_d4", drop >= 10.0, drop, 10.0,
          "max normalized |Sigma(k,l)| at |k-l|_inf = 1 over the same at 4, k = (3,0,0,0)");
}

void suite_wick(Suite s) {
  const RunConfig& c = s.config;
  SimConfig sim_cfg = c.sim_config();
  sim_cfg.lattice = FreqLattice(kSmallM, c.q);
  const SpectralSimulator sim(sim_cfg);
  const FreqLattice& lattice = sim_cfg.lattice;
  const IVec4 base{1, 0, 0, 0};
  const std::vector<IVec4> others = {{1, 0, 0, 0}, {2, 0, 0, 0}, {-1, 0, 0, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}};
  for (const IVec4& l : others) {
    if (!lattice.representable(l)) {
      s.check("pairs", false, 0.0, 0.0, "frequency " + detail::ivec_str(l) + " not representable");
      return;
    }
  }
  const auto reps = static_cast<std::size_t>(c.validate.wick_reps);
  const std::size_t width = others.size() + 1;
  std::vector<double> power(reps * width);
  parallel_for(reps, c.threads, [&](std::size_t r) {
    RngStream rng = RngStream::derive(c.seed, StreamDomain::validation, 100 + r);
    const CoefficientField f = sim.simulate_with(1, rng);
    power[r * width] = std::norm(f.at(base, lattice));
    for (std::size_t i = 0; i < others.size(); ++i) power[r * width + 1 + i] = std::norm(f.at(others[i], lattice));
  });
  const MaternParams& model = sim_cfg.pair.model1;
  const double va = cross_cov_discrete(base, base, model, sim.kernel(), c.conv_mode).first.real();
  constexpr double zmax = 5.0;
  for (std::size_t i = 0; i < others.size(); ++i) {
    const auto [sigma, pi] = cross_cov_discrete(base, others[i], model, sim.kernel(), c.conv_mode);
    const double vb = cross_cov_discrete(others[i], others[i], model, sim.kernel(), c.conv_mode).first.real();
    const double theory = std::norm(sigma) + std::norm(pi);
    std::vector<double> prod(reps);
    for (std::size_t r = 0; r < reps; ++r) prod[r] = (power[r * width] - va) * (power[r * width + 1 + i] - vb);
    const auto [mean, var] = mean_and_variance(prod);
    const double se = std::sqrt(var / static_cast<double>(reps));
    const double z = std::abs(mean - theory) / se;
    s.check("cov_" + detail::ivec_str(base) + "_" + detail::ivec_str(others[i]), z <= zmax, z, zmax,
            "empirical " + format_double(mean) + " vs |Sigma|^2 + |Pi|^2 = " + format_double(theory));
  }
}

}  // namespace

RunReport run_validation(const RunConfig& c) {
  c.validate_fields();
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw ConfigError("run.out: cannot create " + c.out_dir.string() + ": " + ec.message());
  RunReport report;
  const std::vector<std::pair<std::string, void (*)(Suite)>> suites = {
      {"fft", suite_fft},       {"hermitian", suite_hermitian}, {"ratio", suite_ratio}, {"delta", suite_delta},
      {"growth", suite_growth}, {"decay", suite_decay},         {"wick", suite_wick}};
  Json timings = Json::object();
  for (const auto& [name, fn] : suites) {
    const auto& sel = c.validate.suites;
    if (!sel.empty() && std::find(sel.begin(), sel.end(), name) == sel.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    fn(Suite{c, report, name});
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  for (const auto& chk : report.checks) report.passed = report.passed && chk.passed;

  const auto toml_path = c.out_dir / "config_resolved.toml";
  detail::write_text(toml_path, to_toml(c));
  report.artifacts.insert(report.artifacts.begin(), toml_path);

  Json j;
  j["kind"] = "validate";
  j["config"] = detail::config_json(c);
  j["passed"] = report.passed;
  j["failed"] = report.failed_checks();
  Json checks = Json::array();
  for (const auto& chk : report.checks) {
    checks.push_back({{"suite", chk.suite},
                      {"name", chk.name},
                      {"passed", chk.passed},
                      {"value", chk.value},
                      {"threshold", chk.threshold},
                      {"detail", chk.detail}});
  }
  j["checks"] = checks;
  j["timings_seconds"] = timings;
  Json artifacts = Json::array();
  for (const auto& p : report.artifacts) artifacts.push_back(p.filename().string());
  j["artifacts"] = artifacts;
  report.summary_path = c.out_dir / "validation.json";
  detail::write_text(report.summary_path, detail::dump_json(j));
  return report;
}

}  // namespace matern4d
