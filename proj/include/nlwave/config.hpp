#ifndef NLWAVE_CONFIG_HPP
#define NLWAVE_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "nlwave/error.hpp"
#include "nlwave/kernel.hpp"
#include "nlwave/model.hpp"

namespace nlwave {

// Sectioned "key = value" text; '#' starts a comment.
class ConfigText {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigText parse(const std::string& text, const std::string& source = "<config>") {
    ConfigText c;
    c.source_ = source;
    std::istringstream in(text);
    std::string line, section;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') c.error(no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) c.error(no, "empty section name");
        c.sections_.insert(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) c.error(no, "expected 'key = value'");
      if (section.empty()) c.error(no, "key outside any section");
      const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key.empty()) c.error(no, "empty key");
      if (val.empty()) c.error(no, "empty value for '" + key + "'");
      auto& sec = c.data_[section];
      if (sec.count(key)) c.error(no, "duplicate key '" + key + "' (first on line " + std::to_string(sec[key].line) + ")");
      sec[key] = {val, no};
    }
    return c;
  }

  static ConfigText load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Config, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& s, const std::string& k) const {
    auto it = data_.find(s);
    return it != data_.end() && it->second.count(k);
  }
  const Entry* find(const std::string& s, const std::string& k) const {
    used_.insert(s + "." + k);
    auto it = data_.find(s);
    if (it == data_.end()) return nullptr;
    auto jt = it->second.find(k);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  std::optional<double> number(const std::string& s, const std::string& k,
                               const std::function<bool(double)>& ok = nullptr, const std::string& rule = "") const {
    const Entry* e = find(s, k);
    if (!e) return std::nullopt;
    double v = 0;
    std::size_t pos = 0;
    try {
      v = std::stod(e->value, &pos);
    } catch (...) {
      pos = 0;
    }
    if (pos != e->value.size()) error(e->line, s + "." + k + ": '" + e->value + "' is not a number");
    if (ok && !ok(v)) error(e->line, s + "." + k + " = " + e->value + " violates " + rule);
    return v;
  }
  double number_or(const std::string& s, const std::string& k, double def,
                   const std::function<bool(double)>& ok = nullptr, const std::string& rule = "") const {
    return number(s, k, ok, rule).value_or(def);
  }
  std::optional<std::string> text(const std::string& s, const std::string& k) const {
    const Entry* e = find(s, k);
    return e ? std::optional<std::string>(e->value) : std::nullopt;
  }
  std::string choice(const std::string& s, const std::string& k, const std::string& def,
                     const std::set<std::string>& allowed) const {
    const Entry* e = find(s, k);
    if (!e) return def;
    if (!allowed.count(e->value)) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
      error(e->line, s + "." + k + " = " + e->value + " is not one of " + opts);
    }
    return e->value;
  }
  int line_of(const std::string& s, const std::string& k) const {
    auto it = data_.find(s);
    if (it == data_.end() || !it->second.count(k)) return 0;
    return it->second.at(k).line;
  }

  // Every key must have been read by the builder.
  void reject_unused() const {
    for (const auto& [s, keys] : data_)
      for (const auto& [k, e] : keys)
        if (!used_.count(s + "." + k)) error(e.line, "unknown key '" + k + "' in [" + s + "]");
  }

  [[noreturn]] void error(int line, const std::string& msg) const {
    fail(ErrorCode::Config, source_ + ":" + std::to_string(line) + ": " + msg);
  }
  const std::string& source() const { return source_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  std::string source_;
  std::set<std::string> sections_;
  std::map<std::string, std::map<std::string, Entry>> data_;
  mutable std::set<std::string> used_;
};

struct GridSection {
  double xi_min = -60, xi_max = 60, h = 0.1;
  double tol_bc = 1e-3;
  Grid grid() const { return Grid::with_spacing(xi_min, xi_max, h); }
};

struct ExperimentConfig {
  struct {
    double D = 0.1, gamma1 = 0.02, gamma2 = 0.1, tau = 0.5;
    std::string reaction = "nicholson";
    std::map<std::string, double> reaction_params{{"p", 2.7}, {"d", 1.0}, {"a", 1.0}, {"mu0", 0.0}};
    double u_max = 10.0;
  } model;
  struct {
    std::string family = "gaussian";
    double sigma = 1.0, b = 1.0, halfwidth = 1.0;
    std::string table;
    double radius = 0.0;  // 0: family default
    double tolerance = 1e-10;
  } kernel;
  GridSection grid;
  struct {
    std::optional<double> c;
    double speed_factor = 1.05;
    double tol = 1e-13;
    int max_iter = 5000;
    std::string scheme = "exponential";
    std::optional<double> seed_rate;
  } wave;
  struct {
    double c_star = 0.0, mu_fraction = 0.9, beta_fraction = 0.5;
    std::optional<double> beta;
  } certificate;
  struct {
    std::string frame = "moving";
    GridSection grid{-15, 250, 0.1, 0.05};
    std::optional<double> T, dt;
    double sample_dt = 0.5;
    std::uint64_t seed = 1;
    std::string perturbation = "bump_pair";
    double amplitude = 0.1, center = 4.0, width = 3.0, separation = 8.0;
    bool envelope = true;
    std::string convolution = "direct";
  } evolution;
  struct {
    double amplification = 10.0, window_start = 0.5;
  } analysis;
  struct {
    std::string dir = "out";
    bool snapshots = false;
  } output;
};

namespace detail {
inline bool positive(double x) { return x > 0; }
inline bool nonneg(double x) { return x >= 0; }
inline bool unit_open(double x) { return x > 0 && x < 1; }

inline GridSection read_grid(const ConfigText& t, const std::string& s, GridSection g) {
  g.xi_min = t.number_or(s, "xi_min", g.xi_min);
  g.xi_max = t.number_or(s, "xi_max", g.xi_max);
  if (!(g.xi_max > g.xi_min)) t.error(t.line_of(s, "xi_max"), s + ": xi_max must exceed xi_min");
  const auto n = t.number(s, "n", [](double v) { return v >= 3 && v == std::floor(v); }, "integer n >= 3");
  const auto h = t.number(s, "h", positive, "h > 0");
  if (n && h) t.error(t.line_of(s, "n"), s + ": give either n or h, not both");
  if (n) g.h = (g.xi_max - g.xi_min) / (*n - 1);
  if (h) g.h = *h;
  if ((g.xi_max - g.xi_min) / g.h < 2) t.error(t.line_of(s, h ? "h" : "xi_max"), s + ": fewer than 3 nodes");
  g.tol_bc = t.number_or(s, "tol_bc", g.tol_bc, positive, "tol_bc > 0");
  return g;
}
}  // namespace detail

inline ExperimentConfig read_config(const ConfigText& t) {
  using namespace detail;
  ExperimentConfig c;
  auto& m = c.model;
  m.D = t.number_or("model", "D", m.D, positive, "D > 0");
  m.gamma1 = t.number_or("model", "gamma1", m.gamma1, positive, "gamma1 > 0");
  m.gamma2 = t.number_or("model", "gamma2", m.gamma2, positive, "gamma2 > 0");
  m.tau = t.number_or("model", "tau", m.tau, nonneg, "tau >= 0");
  m.u_max = t.number_or("model", "u_max", m.u_max, positive, "u_max > 0");
  m.reaction = t.choice("model", "reaction", m.reaction, {"nicholson", "delayed_logistic"});
  if (m.reaction == "nicholson") {
    m.reaction_params = {{"p", t.number_or("model", "p", 2.7, positive, "p > 0")},
                         {"d", t.number_or("model", "d", 1.0, positive, "d > 0")},
                         {"a", t.number_or("model", "a", 1.0, positive, "a > 0")},
                         {"mu0", t.number_or("model", "mu0", 0.0, nonneg, "mu0 >= 0")}};
  } else {
    m.reaction_params = {{"r", t.number_or("model", "r", 1.0, positive, "r > 0")},
                         {"k", t.number_or("model", "k", 1.0, positive, "k > 0")}};
  }

  auto& k = c.kernel;
  k.family = t.choice("kernel", "family", k.family, {"gaussian", "laplace", "tophat", "tabulated"});
  k.sigma = t.number_or("kernel", "sigma", k.sigma, positive, "sigma > 0");
  k.b = t.number_or("kernel", "b", k.b, positive, "b > 0");
  k.halfwidth = t.number_or("kernel", "halfwidth", k.halfwidth, positive, "halfwidth > 0");
  k.table = t.text("kernel", "table").value_or("");
  if (k.family == "tabulated" && k.table.empty()) t.error(t.line_of("kernel", "family"), "tabulated kernel needs 'table'");
  k.radius = t.number_or("kernel", "radius", k.radius, positive, "radius > 0");
  k.tolerance = t.number_or("kernel", "tolerance", k.tolerance, positive, "tolerance > 0");

  c.grid = read_grid(t, "grid", {-80, 520, 0.05, 1e-3});

  auto& w = c.wave;
  w.c = t.number("wave", "c", positive, "c > 0");
  w.speed_factor = t.number_or("wave", "speed_factor", w.speed_factor, positive, "speed_factor > 0");
  w.tol = t.number_or("wave", "tol", w.tol, positive, "tol > 0");
  w.max_iter = static_cast<int>(t.number_or("wave", "max_iter", w.max_iter,
                                            [](double v) { return v >= 1 && v == std::floor(v); }, "integer >= 1"));
  w.scheme = t.choice("wave", "scheme", w.scheme, {"exponential", "upwind"});
  w.seed_rate = t.number("wave", "seed_rate", positive, "seed_rate > 0");

  auto& ce = c.certificate;
  ce.c_star = t.number_or("certificate", "c_star", ce.c_star, nonneg, "c_star >= 0");
  ce.mu_fraction = t.number_or("certificate", "mu_fraction", ce.mu_fraction, unit_open, "0 < mu_fraction < 1");
  ce.beta_fraction = t.number_or("certificate", "beta_fraction", ce.beta_fraction, unit_open, "0 < beta_fraction < 1");
  ce.beta = t.number("certificate", "beta", positive, "beta > 0");

  auto& e = c.evolution;
  e.frame = t.choice("evolution", "frame", e.frame, {"lab", "moving"});
  e.grid = read_grid(t, "evolution", e.grid);
  if (auto T = t.text("evolution", "T"); T && *T != "auto") e.T = t.number("evolution", "T", nonneg, "T >= 0");
  if (auto dt = t.text("evolution", "dt"); dt && *dt != "auto") e.dt = t.number("evolution", "dt", positive, "dt > 0");
  e.sample_dt = t.number_or("evolution", "sample_dt", e.sample_dt, positive, "sample_dt > 0");
  e.seed = static_cast<std::uint64_t>(
      t.number_or("evolution", "seed", 1.0, [](double v) { return v >= 0 && v == std::floor(v); }, "integer >= 0"));
  e.perturbation = t.choice("evolution", "perturbation", e.perturbation, {"none", "bump", "bump_pair", "random"});
  e.amplitude = t.number_or("evolution", "amplitude", e.amplitude, [](double v) { return v >= 0 && v <= 1; }, "0 <= amplitude <= 1");
  e.center = t.number_or("evolution", "center", e.center);
  e.width = t.number_or("evolution", "width", e.width, positive, "width > 0");
  e.separation = t.number_or("evolution", "separation", e.separation, nonneg, "separation >= 0");
  e.envelope = t.choice("evolution", "envelope", e.envelope ? "true" : "false", {"true", "false"}) == "true";
  e.convolution = t.choice("evolution", "convolution", e.convolution, {"direct", "fft"});

  c.analysis.amplification = t.number_or("analysis", "amplification", c.analysis.amplification,
                                         [](double v) { return v >= 1; }, "amplification >= 1");
  c.analysis.window_start = t.number_or("analysis", "window_start", c.analysis.window_start,
                                        [](double v) { return v >= 0 && v < 1; }, "0 <= window_start < 1");
  c.output.dir = t.text("output", "dir").value_or(c.output.dir);
  c.output.snapshots = t.choice("output", "snapshots", "false", {"true", "false"}) == "true";
  t.reject_unused();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) { return read_config(ConfigText::load(path)); }

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Fully resolved config, defaults included, in canonical order.
inline std::map<std::string, std::string> resolved(const ExperimentConfig& c) {
  std::map<std::string, std::string> r;
  auto num = [&](const std::string& k, double v) { r[k] = fmt_double(v); };
  num("model.D", c.model.D);
  num("model.gamma1", c.model.gamma1);
  num("model.gamma2", c.model.gamma2);
  num("model.tau", c.model.tau);
  num("model.u_max", c.model.u_max);
  r["model.reaction"] = c.model.reaction;
  for (const auto& [k, v] : c.model.reaction_params) num("model." + k, v);
  r["kernel.family"] = c.kernel.family;
  if (c.kernel.family == "gaussian") num("kernel.sigma", c.kernel.sigma);
  if (c.kernel.family == "laplace") num("kernel.b", c.kernel.b);
  if (c.kernel.family == "tophat") num("kernel.halfwidth", c.kernel.halfwidth);
  if (c.kernel.family == "tabulated") r["kernel.table"] = c.kernel.table;
  num("kernel.radius", c.kernel.radius);
  num("kernel.tolerance", c.kernel.tolerance);
  for (const auto& [s, g] : {std::pair<std::string, GridSection>{"grid", c.grid}, {"evolution", c.evolution.grid}}) {
    num(s + ".xi_min", g.xi_min);
    num(s + ".xi_max", g.xi_max);
    num(s + ".h", g.h);
    num(s + ".tol_bc", g.tol_bc);
  }
  r["wave.c"] = c.wave.c ? fmt_double(*c.wave.c) : "auto";
  num("wave.speed_factor", c.wave.speed_factor);
  num("wave.tol", c.wave.tol);
  num("wave.max_iter", c.wave.max_iter);
  r["wave.scheme"] = c.wave.scheme;
  r["wave.seed_rate"] = c.wave.seed_rate ? fmt_double(*c.wave.seed_rate) : "auto";
  num("certificate.c_star", c.certificate.c_star);
  num("certificate.mu_fraction", c.certificate.mu_fraction);
  num("certificate.beta_fraction", c.certificate.beta_fraction);
  r["certificate.beta"] = c.certificate.beta ? fmt_double(*c.certificate.beta) : "auto";
  r["evolution.frame"] = c.evolution.frame;
  r["evolution.T"] = c.evolution.T ? fmt_double(*c.evolution.T) : "auto";
  r["evolution.dt"] = c.evolution.dt ? fmt_double(*c.evolution.dt) : "auto";
  num("evolution.sample_dt", c.evolution.sample_dt);
  r["evolution.seed"] = std::to_string(c.evolution.seed);
  r["evolution.perturbation"] = c.evolution.perturbation;
  num("evolution.amplitude", c.evolution.amplitude);
  num("evolution.center", c.evolution.center);
  num("evolution.width", c.evolution.width);
  num("evolution.separation", c.evolution.separation);
  r["evolution.envelope"] = c.evolution.envelope ? "true" : "false";
  r["evolution.convolution"] = c.evolution.convolution;
  num("analysis.amplification", c.analysis.amplification);
  num("analysis.window_start", c.analysis.window_start);
  r["output.dir"] = c.output.dir;
  r["output.snapshots"] = c.output.snapshots ? "true" : "false";
  return r;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Output location is excluded so the same experiment hashes the same wherever it is written.
inline std::string config_hash(const ExperimentConfig& c) {
  std::string canon;
  for (const auto& [k, v] : resolved(c))
    if (k != "output.dir") canon += k + "=" + v + "\n";
  return hex64(fnv1a(canon));
}

inline Reaction build_reaction(const ExperimentConfig& c) {
  const auto& rp = c.model.reaction_params;
  if (c.model.reaction == "nicholson") return nicholson(rp.at("p"), rp.at("d"), rp.at("a"), rp.at("mu0"), c.model.tau);
  return delayed_logistic(rp.at("r"), rp.at("k"));
}

inline ModelParams build_params(const ExperimentConfig& c) {
  return ModelParams::make(c.model.D, c.model.gamma1, c.model.gamma2, c.model.tau, build_reaction(c), c.model.u_max);
}

inline KernelSpec build_kernel_spec(const ExperimentConfig& c) {
  const auto& k = c.kernel;
  KernelSpec s;
  if (k.family == "gaussian") s = KernelSpec::gaussian(k.sigma, k.radius);
  else if (k.family == "laplace") s = KernelSpec::laplace(k.b, k.radius);
  else if (k.family == "tophat") s = KernelSpec::tophat(k.halfwidth);
  else s = KernelSpec::tabulated_file(k.table);
  if (k.radius > 0) s.radius = k.radius;
  s.tolerance = k.tolerance;
  return s;
}

}  // namespace nlwave

#endif
