#include "matern4d/cli_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <toml.hpp>

#include "matern4d/parallel.hpp"
#include "matern4d/score_statistic.hpp"
#include "report_io.hpp"

namespace matern4d {

using detail::Json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

namespace {

void dump_into(const Json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (v.type()) {
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_into(item, indent + 2, out);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        dump_into(item, indent + 2, out);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump_into(value, 0, out);
  out += "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string ivec_str(const IVec4& k) {
  return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) + "," +
         std::to_string(k[3]) + ")";
}

Json config_json(const RunConfig& c) {
  Json j;
  j["kind"] = kind_name(c.kind);
  j["lattice"] = {{"M", c.M}, {"q", c.q}};
  j["taper"] = {{"R", c.taper.radius}, {"Q", c.taper.subintervals}};
  if (c.models_matched) {
    j["models"] = {{"m", c.m}, {"alpha1", c.alpha1}, {"alpha2", c.alpha2}, {"nu", c.nu}};
  } else {
    j["models"] = {{"model1", {{"sigma", c.sigma1}, {"alpha", c.alpha1}, {"nu", c.nu1}}},
                   {"model2", {{"sigma", c.sigma2}, {"alpha", c.alpha2}, {"nu", c.nu2}}}};
  }
  j["shell"] = {{"K0", c.K0}, {"K1", c.K1}};
  j["mc"] = {{"reps", c.reps}};
  j["conv"] = {{"mode", c.conv_mode == ConvMode::circular ? "circular" : "padded_linear"}};
  const WhittleSection& w = c.whittle;
  j["whittle"] = {{"n_obs", w.n_obs}, {"alpha_min", w.alpha_min}, {"alpha_max", w.alpha_max},
                  {"alpha_step", w.alpha_step}, {"reps", w.reps}, {"alpha", w.alpha},
                  {"m", w.m}, {"nu", w.nu}};
  const ValidateSection& v = c.validate;
  j["validate"] = {{"suites", v.suites}, {"wick_reps", v.wick_reps}, {"growth_k0", v.growth_k0},
                   {"growth_n", v.growth_n}, {"corrupt_kernel", v.corrupt_kernel}};
  j["run"] = {{"seed", c.seed}, {"threads", c.threads}, {"out", c.out_dir.string()}};
  return j;
}

}  // namespace detail

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::tn:
      return "tn";
    case ExperimentKind::whittle:
      return "whittle";
    case ExperimentKind::validate:
      return "validate";
  }
  return "?";
}

std::vector<std::string> RunReport::failed_checks() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.suite + "." + c.name);
  return out;
}

ModelPair RunConfig::pair() const {
  if (models_matched) return ModelPair::matched(m, alpha1, alpha2, nu);
  return {MaternParams(sigma1, alpha1, nu1), MaternParams(sigma2, alpha2, nu2)};
}

SimConfig RunConfig::sim_config() const {
  SimConfig s{FreqLattice(M, q), taper, pair(), conv_mode, seed};
  return s;
}

WhittleConfig RunConfig::whittle_config() const {
  WhittleConfig w;
  w.nu = whittle.nu;
  w.alpha_grid = WhittleConfig::make_grid(whittle.alpha_min, whittle.alpha_max, whittle.alpha_step);
  w.reps = whittle.reps;
  w.master_seed = seed;
  return w;
}

namespace {

const std::set<std::string> kSuites = {"fft", "hermitian", "ratio", "delta", "growth", "decay", "wick"};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

bool closed_form_nu(double nu) { return nu == 0.5 || nu == 1.5 || nu == 2.5; }

}  // namespace

void RunConfig::validate_fields() const {
  require(M >= 1, "lattice.M", "must be >= 1");
  require(q >= 1, "lattice.q", "must be >= 1");
  require(taper.radius > 0.0 && std::isfinite(taper.radius), "taper.R", "must be positive");
  require(taper.subintervals >= 2 && taper.subintervals % 2 == 0, "taper.Q", "must be an even integer >= 2");
  if (models_matched) {
    require(m > 0.0, "models.m", "must be positive");
    require(alpha1 > 0.0, "models.alpha1", "must be positive");
    require(alpha2 > 0.0, "models.alpha2", "must be positive");
    require(nu > 0.0, "models.nu", "must be positive");
  } else {
    require(sigma1 > 0.0, "models.model1.sigma", "must be positive");
    require(alpha1 > 0.0, "models.model1.alpha", "must be positive");
    require(nu1 > 0.0, "models.model1.nu", "must be positive");
    require(sigma2 > 0.0, "models.model2.sigma", "must be positive");
    require(alpha2 > 0.0, "models.model2.alpha", "must be positive");
    require(nu2 > 0.0, "models.model2.nu", "must be positive");
  }
  require(K0 >= 1, "shell.K0", "must be >= 1");
  require(K0 <= K1, "shell.K0", "must not exceed shell.K1");
  if (kind == ExperimentKind::tn) {
    require(static_cast<long long>(q) * K0 <= M - 1, "shell.K0",
            "no representable frequency: q * K0 must be <= M - 1");
  }
  require(reps >= 1, "mc.reps", "must be >= 1");
  require(whittle.n_obs >= 2, "whittle.n_obs", "must be >= 2");
  require(whittle.alpha_min > 0.0, "whittle.alpha_min", "must be positive");
  require(whittle.alpha_max >= whittle.alpha_min, "whittle.alpha_max", "must be >= whittle.alpha_min");
  require(whittle.alpha_step > 0.0, "whittle.alpha_step", "must be positive");
  require(whittle.reps >= 1, "whittle.reps", "must be >= 1");
  require(whittle.alpha > 0.0, "whittle.alpha", "must be positive");
  require(whittle.m > 0.0, "whittle.m", "must be positive");
  require(closed_form_nu(whittle.nu), "whittle.nu", "must be 0.5, 1.5 or 2.5");
  for (const auto& s : validate.suites) require(kSuites.count(s) == 1, "validate.suites", "unknown suite '" + s + "'");
  require(validate.wick_reps >= 10, "validate.wick_reps", "must be >= 10");
  require(validate.growth_k0 >= 1, "validate.growth_k0", "must be >= 1");
  require(validate.growth_n.size() >= 3, "validate.growth_n", "needs at least three values");
  for (std::size_t i = 0; i < validate.growth_n.size(); ++i) {
    require(validate.growth_n[i] >= validate.growth_k0, "validate.growth_n", "values must be >= growth_k0");
    if (i > 0) require(validate.growth_n[i] > validate.growth_n[i - 1], "validate.growth_n", "must increase");
  }
}

namespace {

// Strict accessors over one TOML section.
class Section {
 public:
  Section(const toml::table* table, std::string name, std::set<std::string> allowed)
      : table_(table), name_(std::move(name)) {
    if (table_ == nullptr) return;
    for (auto&& [key, node] : *table_) {
      const std::string k(key.str());
      if (allowed.count(k) == 0) throw ConfigError(name_ + "." + k + ": unknown key");
    }
  }

  const toml::node* find(const std::string& key) const {
    return table_ == nullptr ? nullptr : table_->get(key);
  }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  void read(const std::string& key, int& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const auto v = n->value_exact<std::int64_t>();
    require(v.has_value(), field(key), "expected an integer");
    require(*v >= std::numeric_limits<int>::min() && *v <= std::numeric_limits<int>::max(), field(key),
            "out of range");
    out = static_cast<int>(*v);
  }

  void read(const std::string& key, double& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    if (const auto i = n->value_exact<std::int64_t>()) {
      out = static_cast<double>(*i);
      return;
    }
    const auto v = n->value_exact<double>();
    require(v.has_value(), field(key), "expected a number");
    require(std::isfinite(*v), field(key), "must be finite");
    out = *v;
  }

  void read(const std::string& key, bool& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const auto v = n->value_exact<bool>();
    require(v.has_value(), field(key), "expected true or false");
    out = *v;
  }

  void read(const std::string& key, std::string& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const auto v = n->value_exact<std::string>();
    require(v.has_value(), field(key), "expected a string");
    out = *v;
  }

  void read(const std::string& key, std::uint64_t& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    if (const auto i = n->value_exact<std::int64_t>()) {
      require(*i >= 0, field(key), "must be nonnegative");
      out = static_cast<std::uint64_t>(*i);
      return;
    }
    const auto s = n->value_exact<std::string>();
    require(s.has_value(), field(key), "expected a nonnegative integer");
    try {
      std::size_t used = 0;
      out = std::stoull(*s, &used);
      require(used == s->size() && !s->empty() && (*s)[0] != '-', field(key), "expected a nonnegative integer");
    } catch (const std::logic_error&) {
      throw ConfigError(field(key) + ": expected a nonnegative integer");
    }
  }

  template <class T>
  void read_list(const std::string& key, std::vector<T>& out) const {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const toml::array* a = n->as_array();
    require(a != nullptr, field(key), "expected an array");
    out.clear();
    for (const toml::node& item : *a) {
      const auto v = item.value_exact<std::conditional_t<std::is_same_v<T, int>, std::int64_t, T>>();
      require(v.has_value(), field(key), "unexpected element type");
      out.push_back(static_cast<T>(*v));
    }
  }

 private:
  const toml::table* table_;
  std::string name_;
};

const toml::table* subtable(const toml::table& root, const std::string& name) {
  const toml::node* n = root.get(name);
  if (n == nullptr) return nullptr;
  const toml::table* t = n->as_table();
  if (t == nullptr) throw ConfigError(name + ": expected a table");
  return t;
}

}  // namespace

RunConfig parse_config(const std::string& toml_text, ExperimentKind kind) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  const std::set<std::string> sections = {"lattice", "taper", "models", "shell", "mc",
                                          "whittle", "conv", "run", "validate"};
  for (auto&& [key, node] : root) {
    if (sections.count(std::string(key.str())) == 0) throw ConfigError(std::string(key.str()) + ": unknown section");
  }

  RunConfig c;
  c.kind = kind;
  {
    Section s(subtable(root, "lattice"), "lattice", {"M", "q"});
    s.read("M", c.M);
    s.read("q", c.q);
  }
  {
    Section s(subtable(root, "taper"), "taper", {"R", "Q"});
    s.read("R", c.taper.radius);
    s.read("Q", c.taper.subintervals);
  }
  if (const toml::table* models = subtable(root, "models")) {
    const bool explicit_form = models->contains("model1") || models->contains("model2");
    if (explicit_form) {
      Section top(models, "models", {"model1", "model2"});
      require(models->contains("model1") && models->contains("model2"), "models",
              "explicit form needs both [models.model1] and [models.model2]");
      c.models_matched = false;
      Section m1(subtable(*models, "model1"), "models.model1", {"sigma", "alpha", "nu"});
      Section m2(subtable(*models, "model2"), "models.model2", {"sigma", "alpha", "nu"});
      for (const auto* s : {&m1, &m2})
        for (const char* key : {"sigma", "alpha", "nu"})
          require(s->find(key) != nullptr, s->field(key), "required in explicit form");
      m1.read("sigma", c.sigma1);
      m1.read("alpha", c.alpha1);
      m1.read("nu", c.nu1);
      m2.read("sigma", c.sigma2);
      m2.read("alpha", c.alpha2);
      m2.read("nu", c.nu2);
      c.nu = c.nu1;
    } else {
      Section s(models, "models", {"m", "alpha1", "alpha2", "nu"});
      s.read("m", c.m);
      s.read("alpha1", c.alpha1);
      s.read("alpha2", c.alpha2);
      s.read("nu", c.nu);
    }
  }
  {
    Section s(subtable(root, "shell"), "shell", {"K0", "K1"});
    s.read("K0", c.K0);
    s.read("K1", c.K1);
  }
  {
    Section s(subtable(root, "mc"), "mc", {"reps"});
    s.read("reps", c.reps);
  }
  {
    Section s(subtable(root, "conv"), "conv", {"mode"});
    std::string mode = "circular";
    s.read("mode", mode);
    if (mode == "circular") {
      c.conv_mode = ConvMode::circular;
    } else if (mode == "padded_linear") {
      c.conv_mode = ConvMode::padded_linear;
    } else {
      throw ConfigError("conv.mode: expected \"circular\" or \"padded_linear\"");
    }
  }
  {
    Section s(subtable(root, "whittle"), "whittle",
              {"n_obs", "alpha_min", "alpha_max", "alpha_step", "reps", "alpha", "m", "nu"});
    WhittleSection& w = c.whittle;
    s.read("n_obs", w.n_obs);
    s.read("alpha_min", w.alpha_min);
    s.read("alpha_max", w.alpha_max);
    s.read("alpha_step", w.alpha_step);
    s.read("reps", w.reps);
    s.read("alpha", w.alpha);
    s.read("m", w.m);
    s.read("nu", w.nu);
  }
  {
    Section s(subtable(root, "validate"), "validate",
              {"suites", "wick_reps", "growth_k0", "growth_n", "corrupt_kernel"});
    ValidateSection& v = c.validate;
    s.read_list("suites", v.suites);
    s.read("wick_reps", v.wick_reps);
    s.read("growth_k0", v.growth_k0);
    s.read_list("growth_n", v.growth_n);
    s.read("corrupt_kernel", v.corrupt_kernel);
  }
  {
    Section s(subtable(root, "run"), "run", {"seed", "threads", "out"});
    s.read("seed", c.seed);
    int threads = 0;
    s.read("threads", threads);
    require(threads >= 0, "run.threads", "must be nonnegative");
    c.threads = static_cast<unsigned>(threads);
    std::string out = c.out_dir.string();
    s.read("out", out);
    c.out_dir = out;
  }
  c.validate_fields();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, ExperimentKind kind) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  return parse_config(text.str(), kind);
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream o;
  auto num = [](double x) {
    std::string s = format_double(x);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  };
  auto quoted = [](const std::string& s) { return Json(s).dump(); };
  o << "[lattice]\nM = " << c.M << "\nq = " << c.q << "\n\n";
  o << "[taper]\nR = " << num(c.taper.radius) << "\nQ = " << c.taper.subintervals << "\n\n";
  if (c.models_matched) {
    o << "[models]\nm = " << num(c.m) << "\nalpha1 = " << num(c.alpha1) << "\nalpha2 = " << num(c.alpha2)
      << "\nnu = " << num(c.nu) << "\n\n";
  } else {
    o << "[models.model1]\nsigma = " << num(c.sigma1) << "\nalpha = " << num(c.alpha1) << "\nnu = " << num(c.nu1)
      << "\n\n[models.model2]\nsigma = " << num(c.sigma2) << "\nalpha = " << num(c.alpha2)
      << "\nnu = " << num(c.nu2) << "\n\n";
  }
  o << "[shell]\nK0 = " << c.K0 << "\nK1 = " << c.K1 << "\n\n";
  o << "[mc]\nreps = " << c.reps << "\n\n";
  o << "[conv]\nmode = " << quoted(c.conv_mode == ConvMode::circular ? "circular" : "padded_linear") << "\n\n";
  const WhittleSection& w = c.whittle;
  o << "[whittle]\nn_obs = " << w.n_obs << "\nalpha_min = " << num(w.alpha_min) << "\nalpha_max = "
    << num(w.alpha_max) << "\nalpha_step = " << num(w.alpha_step) << "\nreps = " << w.reps
    << "\nalpha = " << num(w.alpha) << "\nm = " << num(w.m) << "\nnu = " << num(w.nu) << "\n\n";
  const ValidateSection& v = c.validate;
  o << "[validate]\nsuites = [";
  for (std::size_t i = 0; i < v.suites.size(); ++i) o << (i ? ", " : "") << quoted(v.suites[i]);
  o << "]\nwick_reps = " << v.wick_reps << "\ngrowth_k0 = " << v.growth_k0 << "\ngrowth_n = [";
  for (std::size_t i = 0; i < v.growth_n.size(); ++i) o << (i ? ", " : "") << v.growth_n[i];
  o << "]\ncorrupt_kernel = " << (v.corrupt_kernel ? "true" : "false") << "\n\n";
  o << "[run]\nseed = ";
  if (c.seed <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    o << c.seed;
  } else {
    o << quoted(std::to_string(c.seed));
  }
  o << "\nthreads = " << c.threads << "\nout = " << quoted(c.out_dir.string()) << "\n";
  return o.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void prepare_out_dir(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw ConfigError("run.out: cannot create " + c.out_dir.string() + ": " + ec.message());
}

std::filesystem::path emit(RunReport& report, const RunConfig& c, const std::string& name, const std::string& text) {
  const auto path = c.out_dir / name;
  detail::write_text(path, text);
  report.artifacts.push_back(path);
  return path;
}

Json artifact_list(const RunReport& r) {
  Json a = Json::array();
  for (const auto& p : r.artifacts) a.push_back(p.filename().string());
  return a;
}

// Linear-interpolated sample quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

constexpr int kHistogramBins = 40;

}  // namespace

RunReport run_tn_experiment(const RunConfig& c) {
  c.validate_fields();
  prepare_out_dir(c);
  RunReport report;
  const auto t0 = Clock::now();
  const SimConfig sim_cfg = c.sim_config();
  const SpectralSimulator simulator(sim_cfg);
  Shell shell;
  try {
    shell = shell_indices(c.K0, c.K1, sim_cfg.lattice);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("shell: ") + e.what());
  }
  std::optional<ShellScorer> scorer;
  try {
    scorer.emplace(simulator, shell);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("models: ") + e.what());
  }
  const double setup_s = seconds_since(t0);

  MCResult results[2];
  double run_s[2];
  for (int tag = 1; tag <= 2; ++tag) {
    const auto t = Clock::now();
    results[tag - 1] = mc_experiment(*scorer, simulator, c.reps, tag, c.threads);
    run_s[tag - 1] = seconds_since(t);
  }

  detail::CsvTable reps({"model", "replicate", "T", "S"});
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const MCResult& r : results) {
    for (int i = 0; i < r.reps; ++i) {
      const double t = r.per_rep_T[static_cast<std::size_t>(i)];
      reps.add({std::to_string(r.model_tag), std::to_string(i), format_double(t),
                format_double(r.per_rep_S[static_cast<std::size_t>(i)])});
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / kHistogramBins;
  detail::CsvTable hist({"model", "bin", "lower", "upper", "count"});
  for (const MCResult& r : results) {
    std::vector<int> counts(kHistogramBins, 0);
    for (double t : r.per_rep_T) {
      const int b = std::clamp(static_cast<int>((t - lo) / width), 0, kHistogramBins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < kHistogramBins; ++b) {
      hist.add({std::to_string(r.model_tag), std::to_string(b), format_double(lo + b * width),
                format_double(b + 1 == kHistogramBins ? hi : lo + (b + 1) * width),
                std::to_string(counts[static_cast<std::size_t>(b)])});
    }
  }
  emit(report, c, "config_resolved.toml", to_toml(c));
  emit(report, c, "tn_replicates.csv", reps.str());
  emit(report, c, "tn_histogram.csv", hist.str());

  Json j;
  j["kind"] = "tn";
  j["config"] = detail::config_json(c);
  j["shell"] = {{"K0", c.K0}, {"K1", c.K1}, {"n_terms", shell.size()}};
  j["L"] = scorer->L();
  j["inverse_L"] = 1.0 / scorer->L();
  for (const MCResult& r : results) {
    j["models"]["model" + std::to_string(r.model_tag)] = {
        {"reps", r.reps}, {"mean_T", r.mean_T}, {"var_T", r.var_T}};
  }
  j["timings_seconds"] = {{"setup", setup_s}, {"model1", run_s[0]}, {"model2", run_s[1]}};
  j["artifacts"] = artifact_list(report);
  report.summary_path = c.out_dir / "tn_summary.json";
  detail::write_text(report.summary_path, detail::dump_json(j));
  return report;
}

RunReport run_whittle(const RunConfig& c) {
  c.validate_fields();
  prepare_out_dir(c);
  RunReport report;
  const WhittleConfig wc = c.whittle_config();
  const auto t0 = Clock::now();
  const WhittleModel model(c.whittle.n_obs, wc, c.threads);
  const double setup_s = seconds_since(t0);

  const auto reps = static_cast<std::size_t>(c.whittle.reps);
  std::vector<WhittleFit> fits(reps);
  const auto t1 = Clock::now();
  parallel_for(reps, c.threads, [&](std::size_t r) {
    RngStream rng = RngStream::derive(c.seed, StreamDomain::whittle, r);
    const RealTensor4 field = synthesize_field(c.whittle.n_obs, c.whittle.alpha, c.whittle.nu, c.whittle.m, rng);
    fits[r] = model.fit(field);
  });
  const double fit_s = seconds_since(t1);

  detail::CsvTable rows({"replicate", "alpha_hat", "m_hat"});
  std::vector<double> alphas, ms;
  for (std::size_t r = 0; r < reps; ++r) {
    rows.add({std::to_string(r), format_double(fits[r].alpha_hat), format_double(fits[r].m_hat)});
    alphas.push_back(fits[r].alpha_hat);
    ms.push_back(fits[r].m_hat);
  }
  detail::CsvTable profile({"alpha", "objective", "m_hat"});
  for (const ProfilePoint& p : fits.front().objective_curve) {
    profile.add({format_double(p.alpha), format_double(p.objective), format_double(p.m_hat)});
  }
  emit(report, c, "config_resolved.toml", to_toml(c));
  emit(report, c, "whittle_fits.csv", rows.str());
  emit(report, c, "whittle_profile.csv", profile.str());

  std::sort(alphas.begin(), alphas.end());
  std::sort(ms.begin(), ms.end());
  Json j;
  j["kind"] = "whittle";
  j["config"] = detail::config_json(c);
  j["alpha_grid_size"] = wc.alpha_grid.size();
  j["n_frequencies"] = model.k_set().size();
  j["alpha_hat"] = {{"median", quantile(alphas, 0.5)},
                    {"q25", quantile(alphas, 0.25)},
                    {"q75", quantile(alphas, 0.75)},
                    {"iqr", quantile(alphas, 0.75) - quantile(alphas, 0.25)},
                    {"min", alphas.front()},
                    {"max", alphas.back()}};
  j["m_hat"] = {{"median", quantile(ms, 0.5)}, {"q25", quantile(ms, 0.25)}, {"q75", quantile(ms, 0.75)}};
  j["timings_seconds"] = {{"tables", setup_s}, {"fits", fit_s}};
  j["artifacts"] = artifact_list(report);
  report.summary_path = c.out_dir / "whittle_summary.json";
  detail::write_text(report.summary_path, detail::dump_json(j));
  return report;
}

RunReport run(const RunConfig& config) {
  switch (config.kind) {
    case ExperimentKind::tn:
      return run_tn_experiment(config);
    case ExperimentKind::whittle:
      return run_whittle(config);
    case ExperimentKind::validate:
      return run_validation(config);
  }
  throw std::logic_error("unknown experiment kind");
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Matern score-statistic and Whittle experiments in four dimensions"};
  app.require_subcommand(1);
  struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
  };
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"tn", "score statistic T_N under both models"},
      {"whittle", "Monte Carlo study of the profiled Whittle estimator"},
      {"validate", "oracle and asymptotics suites"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "TOML config file")->required();
    sub->add_option("--seed", opt.seed, "master seed (overrides [run] seed)");
    sub->add_option("--out", opt.out, "output directory (overrides [run] out)");
    sub->add_option("--threads", opt.threads, "worker threads, 0 = auto (overrides [run] threads)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  ExperimentKind kind = ExperimentKind::tn;
  if (app.got_subcommand("whittle")) kind = ExperimentKind::whittle;
  if (app.got_subcommand("validate")) kind = ExperimentKind::validate;

  try {
    RunConfig config = load_config(opt.config, kind);
    if (opt.seed) config.seed = *opt.seed;
    if (opt.out) config.out_dir = *opt.out;
    if (opt.threads) config.threads = *opt.threads;
    const RunReport report = run(config);
    std::cout << "summary: " << report.summary_path.string() << "\n";
    if (!report.passed) {
      std::cerr << "validation failed:";
      for (const auto& name : report.failed_checks()) std::cerr << " " << name;
      std::cerr << "\n";
      return kExitValidation;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace matern4d
