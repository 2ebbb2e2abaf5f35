#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "matern4d/spectral_simulator.hpp"
#include "matern4d/whittle_estimator.hpp"

namespace matern4d {

enum class ExperimentKind { tn, whittle, validate };

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitValidation = 3,
  kExitInternal = 4,
};

/// Bad or inconsistent configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WhittleSection {
  int n_obs = 8;
  double alpha_min = 0.5;
  double alpha_max = 6.0;
  double alpha_step = 0.05;
  int reps = 50;
  // Model the fields are drawn from.
  double alpha = 3.0;
  double m = 1.0;
  double nu = 1.5;
};

struct ValidateSection {
  std::vector<std::string> suites;  // empty means every suite
  int wick_reps = 2000;
  int growth_k0 = 3;
  std::vector<int> growth_n = {16, 32, 64, 128};
  bool corrupt_kernel = false;  // test hook: negate one kernel entry
};

/// Everything a run depends on. Serialising it and running again reproduces
/// the CSV outputs byte for byte.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::tn;
  int M = 20;
  int q = 2;
  TaperSpec taper{};
  bool models_matched = true;
  double m = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 2.0;
  double nu = 1.5;
  // Explicit (sigma, alpha, nu) per model; used when models_matched is false.
  double sigma1 = 1.0, sigma2 = 1.0, nu1 = 1.5, nu2 = 1.5;
  int K0 = 3;
  int K1 = 9;
  int reps = 200;
  ConvMode conv_mode = ConvMode::circular;
  WhittleSection whittle{};
  ValidateSection validate{};
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::filesystem::path out_dir = "results";

  ModelPair pair() const;
  SimConfig sim_config() const;
  WhittleConfig whittle_config() const;
  /// Throws ConfigError naming the first invalid field.
  void validate_fields() const;
};

std::string kind_name(ExperimentKind kind);

/// Parses TOML text; unknown sections or keys are rejected.
RunConfig parse_config(const std::string& toml_text, ExperimentKind kind);
RunConfig load_config(const std::filesystem::path& path, ExperimentKind kind);

/// TOML rendering of the fully resolved config (defaults included);
/// parse_config(to_toml(c), c.kind) reproduces c.
std::string to_toml(const RunConfig& config);

/// One pass/fail check of the validation suites.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunReport {
  std::filesystem::path summary_path;
  std::vector<std::filesystem::path> artifacts;
  std::vector<CheckResult> checks;
  bool passed = true;

  std::vector<std::string> failed_checks() const;
};

RunReport run_tn_experiment(const RunConfig& config);
RunReport run_whittle(const RunConfig& config);
RunReport run_validation(const RunConfig& config);
RunReport run(const RunConfig& config);

/// Fixed 17-significant-digit rendering used by every writer.
std::string format_double(double x);

/// Full command-line entry point; returns an ExitCode.
int cli_main(int argc, char** argv);

}  // namespace matern4d
