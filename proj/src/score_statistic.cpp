#include "matern4d/score_statistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "matern4d/parallel.hpp"

namespace matern4d {

Shell shell_indices(int k0, int k1, const FreqLattice& lattice) {
  if (k0 < 0 || k1 < 0) throw std::invalid_argument("shell: K0 and K1 must be nonnegative");
  if (k0 > k1) throw std::invalid_argument("shell: K0 must not exceed K1");
  Shell shell{k0, k1, {}};
  for (int a = 0; a <= k1; ++a)
    for (int b = 0; b <= k1; ++b)
      for (int c = 0; c <= k1; ++c)
        for (int d = 0; d <= k1; ++d) {
          const IVec4 k{a, b, c, d};
          const int n = norm_inf(k);
          if (n >= k0 && lattice.representable(k)) shell.indices.push_back(k);
        }
  if (shell.indices.empty()) {
    throw std::invalid_argument("shell: no representable frequency with " + std::to_string(k0) +
                                " <= |k|_inf <= " + std::to_string(k1));
  }
  return shell;
}

std::vector<double> gather(const RealTensor4& curve, const Shell& shell, const FreqLattice& lattice) {
  std::vector<double> out;
  out.reserve(shell.size());
  for (const IVec4& k : shell.indices) out.push_back(curve[lattice.offset_of(k)]);
  return out;
}

std::vector<double> gather_power(const CoefficientField& field, const Shell& shell, const FreqLattice& lattice) {
  std::vector<double> out;
  out.reserve(shell.size());
  for (const IVec4& k : shell.indices) out.push_back(std::norm(field.X[lattice.offset_of(k)]));
  return out;
}

std::vector<double> delta_from_variances(std::span<const double> v1, std::span<const double> v2) {
  if (v1.size() != v2.size()) throw std::invalid_argument("delta_from_variances: length mismatch");
  std::vector<double> deltas(v1.size());
  for (std::size_t i = 0; i < v1.size(); ++i) {
    if (!(v1[i] > 0.0)) throw std::domain_error("delta_from_variances: v1(k) must be positive");
    deltas[i] = v2[i] / v1[i] - 1.0;
  }
  return deltas;
}

std::vector<double> delta_from_variances(const RealTensor4& v1, const RealTensor4& v2, const Shell& shell,
                                         const FreqLattice& lattice) {
  return delta_from_variances(gather(v1, shell, lattice), gather(v2, shell, lattice));
}

ScoreReport score(std::span<const double> power, std::span<const double> v1, std::span<const double> deltas,
                  const Shell* shell_for_table) {
  if (power.size() != v1.size() || power.size() != deltas.size()) {
    throw std::invalid_argument("score: length mismatch");
  }
  ScoreReport r;
  r.n_terms = power.size();
  if (shell_for_table != nullptr) r.per_k.emplace();
  for (std::size_t i = 0; i < power.size(); ++i) {
    const double normalized = power[i] / v1[i];
    r.S += deltas[i] * (normalized - 1.0);
    r.L += deltas[i] * deltas[i];
    if (r.per_k) r.per_k->push_back({shell_for_table->indices.at(i), deltas[i], normalized});
  }
  if (!(r.L > 0.0)) throw std::domain_error("score: degenerate mismatch (L = 0, models agree on the shell)");
  r.T = r.S / r.L;
  return r;
}

ScoreReport score(const CoefficientField& field, const RealTensor4& v1_curve, std::span<const double> deltas,
                  const Shell& shell, const FreqLattice& lattice, bool with_table) {
  const auto power = gather_power(field, shell, lattice);
  const auto v1 = gather(v1_curve, shell, lattice);
  return score(power, v1, deltas, with_table ? &shell : nullptr);
}

DiagonalLLR diag_llr(std::span<const double> power, std::span<const double> v1, std::span<const double> v2) {
  if (power.size() != v1.size() || power.size() != v2.size()) {
    throw std::invalid_argument("diag_llr: length mismatch");
  }
  DiagonalLLR out;
  for (std::size_t i = 0; i < power.size(); ++i) {
    const double delta = v2[i] / v1[i] - 1.0;
    if (!(delta > -1.0)) throw std::domain_error("diag_llr: requires 1 + delta_k > 0");
    const double normalized = power[i] / v1[i];
    out.llr += -std::log1p(delta) + normalized * delta / (1.0 + delta);
    out.S += delta * (normalized - 1.0);
    out.L += delta * delta;
  }
  out.R = out.llr - (out.S - 0.5 * out.L);
  return out;
}

std::pair<double, double> mean_and_variance(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(values.size() - 1)};
}

ShellScorer::ShellScorer(const SpectralSimulator& simulator, Shell shell)
    : simulator_(&simulator),
      shell_(std::move(shell)),
      v1_(gather(simulator.variance(1), shell_, simulator.lattice())),
      v2_(gather(simulator.variance(2), shell_, simulator.lattice())),
      deltas_(delta_from_variances(v1_, v2_)),
      L_(0.0) {
  for (double d : deltas_) L_ += d * d;
  if (!(L_ > 0.0)) throw std::domain_error("score: degenerate mismatch (L = 0, models agree on the shell)");
}

ScoreReport ShellScorer::score(const CoefficientField& field, bool with_table) const {
  const auto power = gather_power(field, shell_, simulator_->lattice());
  return matern4d::score(power, v1_, deltas_, with_table ? &shell_ : nullptr);
}

MCResult mc_experiment(const ShellScorer& scorer, const SpectralSimulator& simulator, int reps,
                       int generate_under, unsigned threads) {
  if (reps < 1) throw std::invalid_argument("mc_experiment: reps must be >= 1");
  simulator.model(generate_under);
  MCResult result;
  result.reps = reps;
  result.model_tag = generate_under;
  result.per_rep_T.assign(static_cast<std::size_t>(reps), 0.0);
  result.per_rep_S.assign(static_cast<std::size_t>(reps), 0.0);
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const CoefficientField field = simulator.simulate(generate_under, r);
    const ScoreReport s = scorer.score(field);
    result.per_rep_T[r] = s.T;
    result.per_rep_S[r] = s.S;
  });
  std::tie(result.mean_T, result.var_T) = mean_and_variance(result.per_rep_T);
  return result;
}

MCResult mc_experiment(const SpectralSimulator& simulator, const Shell& shell, int reps, int generate_under,
                       unsigned threads) {
  const ShellScorer scorer(simulator, shell);
  return mc_experiment(scorer, simulator, reps, generate_under, threads);
}

std::vector<double> draw_diagonal_power(std::span<const double> variances, RngStream& rng) {
  std::vector<double> power(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    power[i] = 0.5 * variances[i] * (re * re + im * im);
  }
  return power;
}

namespace {

// sum over k in [0, n]^4 of g(|k|^2), via the histogram of a^2 + b^2.
double cube_sum(int n, const std::vector<double>& g) {
  if (n < 0) return 0.0;
  const std::size_t top = 2 * static_cast<std::size_t>(n) * n;
  std::vector<long long> hist(top + 1, 0);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) ++hist[static_cast<std::size_t>(a * a + b * b)];
  std::vector<std::size_t> support;
  for (std::size_t s = 0; s <= top; ++s)
    if (hist[s] != 0) support.push_back(s);
  double total = 0.0;
  for (std::size_t s1 : support) {
    double inner = 0.0;
    for (std::size_t s2 : support) inner += static_cast<double>(hist[s2]) * g[s1 + s2];
    total += static_cast<double>(hist[s1]) * inner;
  }
  return total;
}

}  // namespace

std::vector<GrowthRow> ln_growth(int k0, std::span<const int> n_list, double alpha1, double alpha2, double nu) {
  if (k0 < 0) throw std::invalid_argument("ln_growth: K0 must be nonnegative");
  int n_max = k0;
  for (int n : n_list) {
    if (n < k0) throw std::invalid_argument("ln_growth: every N must be >= K0");
    n_max = std::max(n_max, n);
  }
  const double p = nu + 0.5 * kDim;
  const std::size_t top = 4 * static_cast<std::size_t>(n_max) * n_max;
  std::vector<double> g(top + 1);
  for (std::size_t s = 0; s <= top; ++s) {
    const double k2 = static_cast<double>(s);
    const double d = std::pow((alpha1 * alpha1 + k2) / (alpha2 * alpha2 + k2), p) - 1.0;
    g[s] = d * d;
  }
  const double inner = cube_sum(k0 - 1, g);
  std::vector<GrowthRow> rows;
  for (int n : n_list) rows.push_back({n, cube_sum(n, g) - inner});
  return rows;
}

}  // namespace matern4d
