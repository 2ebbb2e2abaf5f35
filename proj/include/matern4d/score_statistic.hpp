#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "matern4d/spectral_simulator.hpp"

namespace matern4d {

/// Integer frequencies k in N_0^4 with K0 <= |k|_inf <= K1 whose lattice
/// image qk is representable; lexicographic order.
struct Shell {
  int k0 = 0;
  int k1 = 0;
  std::vector<IVec4> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

Shell shell_indices(int k0, int k1, const FreqLattice& lattice);

/// v(k) = v(qk) for every shell index.
std::vector<double> gather(const RealTensor4& curve, const Shell& shell, const FreqLattice& lattice);

/// |X_k|^2 for every shell index.
std::vector<double> gather_power(const CoefficientField& field, const Shell& shell, const FreqLattice& lattice);

/// delta_k = v2(k) / v1(k) - 1.
std::vector<double> delta_from_variances(std::span<const double> v1, std::span<const double> v2);
std::vector<double> delta_from_variances(const RealTensor4& v1, const RealTensor4& v2, const Shell& shell,
                                         const FreqLattice& lattice);

struct ScoreTerm {
  IVec4 k;
  double delta;
  double normalized_power;  // |X_k|^2 / v1(k)
};

struct ScoreReport {
  double S = 0.0;
  double L = 0.0;
  double T = 0.0;
  std::size_t n_terms = 0;
  std::optional<std::vector<ScoreTerm>> per_k;
};

/// S = sum delta_k (|X_k|^2 / v1(k) - 1), L = sum delta_k^2, T = S / L.
ScoreReport score(std::span<const double> power, std::span<const double> v1, std::span<const double> deltas,
                  const Shell* shell_for_table = nullptr);
ScoreReport score(const CoefficientField& field, const RealTensor4& v1_curve, std::span<const double> deltas,
                  const Shell& shell, const FreqLattice& lattice, bool with_table = false);

struct DiagonalLLR {
  double llr = 0.0;
  double S = 0.0;
  double L = 0.0;
  double R = 0.0;  // llr - (S - L / 2)
};

/// Exact log-likelihood ratio of the diagonal laws of model 2 vs model 1.
DiagonalLLR diag_llr(std::span<const double> power, std::span<const double> v1, std::span<const double> v2);

struct MCResult {
  int reps = 0;
  double mean_T = 0.0;
  double var_T = 0.0;  // unbiased sample variance (0 when reps == 1)
  std::vector<double> per_rep_T;
  std::vector<double> per_rep_S;
  int model_tag = 1;
};

/// Mean and unbiased variance accumulated in index order.
std::pair<double, double> mean_and_variance(std::span<const double> values);

/// Shell quantities of one simulator configuration: v1, v2, delta and L.
class ShellScorer {
 public:
  ShellScorer(const SpectralSimulator& simulator, Shell shell);

  const Shell& shell() const noexcept { return shell_; }
  std::span<const double> v1() const noexcept { return v1_; }
  std::span<const double> v2() const noexcept { return v2_; }
  std::span<const double> deltas() const noexcept { return deltas_; }
  double L() const noexcept { return L_; }

  ScoreReport score(const CoefficientField& field, bool with_table = false) const;

 private:
  const SpectralSimulator* simulator_;
  Shell shell_;
  std::vector<double> v1_, v2_, deltas_;
  double L_;
};

/// `reps` independent replicates generated under model `generate_under`,
/// each scored against (v1, delta). Replicate r uses stream r of the model's
/// domain, so results are independent of `threads`.
MCResult mc_experiment(const SpectralSimulator& simulator, const Shell& shell, int reps, int generate_under,
                       unsigned threads = 1);
MCResult mc_experiment(const ShellScorer& scorer, const SpectralSimulator& simulator, int reps,
                       int generate_under, unsigned threads = 1);

/// Independent centred circular complex Gaussians with E|X_k|^2 = variances[k];
/// returns |X_k|^2.
std::vector<double> draw_diagonal_power(std::span<const double> variances, RngStream& rng);

/// L_N = sum over K0 <= |k|_inf <= N of delta_analytic(k)^2, k in N_0^4.
struct GrowthRow {
  int N;
  double L;
};
std::vector<GrowthRow> ln_growth(int k0, std::span<const int> n_list, double alpha1, double alpha2, double nu);

}  // namespace matern4d
