#ifndef NLWAVE_PIPELINE_HPP
#define NLWAVE_PIPELINE_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlwave/io.hpp"

namespace nlwave {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode { kPass = 0, kDomainFailure = 1, kUsageError = 2 };

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(const ExperimentConfig& c, std::string command, std::filesystem::path dir)
      : cfg_(c), command_(std::move(command)), dir_(std::move(dir)), started_(utc_now()) {
    std::filesystem::create_directories(dir_);
  }

  std::filesystem::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void write(int exit_code) const {
    json j{{"command", command_},
           {"tool_version", kToolVersion},
           {"config_hash", config_hash(cfg_)},
           {"started", started_},
           {"finished", utc_now()},
           {"exit_code", exit_code}};
    j["config"] = json::object();
    for (const auto& [k, v] : resolved(cfg_)) j["config"][k] = v;
    j["files"] = json::array();
    for (const auto& f : files_) {
      std::ifstream in(dir_ / f, std::ios::binary);
      std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      j["files"].push_back({{"name", f}, {"bytes", body.size()}, {"fnv1a64", hex64(fnv1a(body))}});
    }
    write_json(dir_ / ("manifest_" + command_ + ".json"), j);
  }

 private:
  ExperimentConfig cfg_;
  std::string command_;
  std::filesystem::path dir_;
  std::string started_;
  std::vector<std::string> files_;
};

inline double resolve_speed(const ExperimentConfig& c, const ModelParams& p, const DiscreteKernel& k) {
  if (c.wave.c) return *c.wave.c;
  const auto b = find_beta(p, k, c.certificate.beta_fraction);
  const double beta = c.certificate.beta.value_or(b.beta);
  return c.wave.speed_factor * speed_threshold(p, k, beta, c.certificate.c_star).c_threshold;
}

inline ProfileOptions profile_options(const ExperimentConfig& c, ProfileScheme scheme) {
  ProfileOptions o;
  o.tol = c.wave.tol;
  o.max_iter = c.wave.max_iter;
  o.scheme = scheme;
  o.seed_rate = c.wave.seed_rate;
  return o;
}

inline ProfileScheme configured_scheme(const ExperimentConfig& c) {
  return c.wave.scheme == "upwind" ? ProfileScheme::upwind : ProfileScheme::exponential;
}

inline CertifyOptions certify_options(const ExperimentConfig& c) {
  CertifyOptions o;
  o.c_star = c.certificate.c_star;
  o.mu_fraction = c.certificate.mu_fraction;
  o.beta_fraction = c.certificate.beta_fraction;
  o.beta_override = c.certificate.beta;
  return o;
}

struct Assumptions {
  AssumptionReport A1, A2;
  GapReport gap;
  bool passed() const { return A1.passed() && A2.passed() && gap.passed(); }
  json to_json() const {
    return {{"pass", passed()}, {"A1", nlwave::to_json(A1)}, {"A2", nlwave::to_json(A2)}, {"quiescence_gap", nlwave::to_json(gap)}};
  }
};

inline Assumptions check_assumptions(const ModelParams& p) {
  return {check_A1(p.reaction, p.K), check_A2(p.reaction, p.K), check_quiescence_gap(p)};
}

inline int cmd_check(const ExperimentConfig& c, const std::filesystem::path& out) {
  Manifest m(c, "check", out);
  const ModelParams p = build_params(c);
  const Assumptions a = check_assumptions(p);
  json j = a.to_json();
  j["K"] = p.K;
  write_json(m.path("assumptions.json"), j);
  const int code = a.passed() ? kPass : kDomainFailure;
  if (!a.A1.passed()) {
    const auto* w = a.A1.worst_failure();
    std::cerr << "A1 fails: " << w->name << " worst " << w->worst << " at (u,v)=(" << w->u << "," << w->v << ")\n";
  }
  if (!a.A2.passed()) std::cerr << "A2 fails: " << a.A2.worst_failure()->name << "\n";
  if (!a.gap.passed()) std::cerr << "quiescence gap or gamma ordering fails\n";
  m.write(code);
  return code;
}

inline int cmd_wave(const ExperimentConfig& c, const std::filesystem::path& out) {
  Manifest m(c, "wave", out);
  const ModelParams p = build_params(c);
  const Assumptions a = check_assumptions(p);
  if (!a.A1.passed() || !a.A2.passed()) {
    std::cerr << "assumptions A1/A2 fail; run 'check' for details\n";
    m.write(kDomainFailure);
    return kDomainFailure;
  }
  const Grid g = c.grid.grid();
  const DiscreteKernel k(build_kernel_spec(c), g.spacing());
  const double speed = resolve_speed(c, p, k);
  const WaveProfile w = solve_profile(p, k, speed, g, profile_options(c, configured_scheme(c)));
  write_text(m.path("profile.txt"), profile_text(w));
  json j = to_json(w);
  j["tol_bc"] = c.grid.tol_bc;
  j["boundary_ok"] = w.boundary_ok(c.grid.tol_bc);
  write_json(m.path("profile.json"), j);
  const int code = w.boundary_ok(c.grid.tol_bc) ? kPass : kDomainFailure;
  if (code != kPass) std::cerr << "profile does not reach the equilibria within tol_bc; enlarge the domain\n";
  m.write(code);
  return code;
}

inline int cmd_certify(const ExperimentConfig& c, const std::filesystem::path& out) {
  Manifest m(c, "certify", out);
  const ModelParams p = build_params(c);
  const Grid g = c.grid.grid();
  const DiscreteKernel k(build_kernel_spec(c), g.spacing());
  const double speed = resolve_speed(c, p, k);
  const WaveProfile w = solve_profile(p, k, speed, g, profile_options(c, configured_scheme(c)));
  const StabilityCertificate s = certify(p, k, w, certify_options(c));
  json j = to_json(s);
  j["profile"] = to_json(w);
  write_json(m.path("certificate.json"), j);
  const int code = s.valid ? kPass : kDomainFailure;
  m.write(code);
  return code;
}

inline Field perturbation_shape(const ExperimentConfig& c, const Grid& g, double K) {
  const auto& e = c.evolution;
  auto bump = [&](double z) {
    if (std::abs(z) >= e.width) return 0.0;
    const double s = std::cos(M_PI * z / (2 * e.width));
    return s * s;
  };
  Field u(g.size(), 0.0);
  if (e.perturbation == "random") {
    std::mt19937_64 rng(e.seed);
    u = random_field(g, 1.0, RandomShape::smooth, rng);
    for (auto& x : u) x = e.amplitude * K * (2 * x - 1);
    return u;
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (e.perturbation == "bump") u[j] = e.amplitude * K * bump(x - e.center);
    if (e.perturbation == "bump_pair")
      u[j] = e.amplitude * K * (bump(x - e.center) - bump(x - e.center - e.separation));
  }
  return u;
}

struct EnvelopeRun {
  std::string name;
  double sign = 1.0;
  PerturbationSeries series;
  QReport q;
  OrderVerdict bounds;
  Trajectory traj;
};

struct Experiment {
  ModelParams params;
  Frame frame;
  WaveProfile wave;
  std::optional<StabilityCertificate> cert;
  std::string cert_error;
  double T = 0, dt = 0;
  std::size_t stride = 1;
  std::vector<EnvelopeRun> runs;
  std::optional<OrderVerdict> comparison;
};

// Series transform applied before the verdict; used to sabotage runs in self-tests.
using SeriesHook = std::function<void(PerturbationSeries&)>;

inline Experiment prepare_experiment(const ExperimentConfig& c) {
  Experiment x;
  x.params = build_params(c);
  const auto& p = x.params;
  const Grid g = c.evolution.grid.grid();
  const DiscreteKernel k(build_kernel_spec(c), g.spacing());
  const double speed = resolve_speed(c, p, k);
  x.frame = c.evolution.frame == "moving" ? Frame::moving(speed) : Frame::lab();
  // The moving frame needs the upwind profile: it is an exact steady state of that scheme.
  const ProfileScheme scheme = x.frame.is_moving() ? ProfileScheme::upwind : configured_scheme(c);
  x.wave = solve_profile(p, k, speed, g, profile_options(c, scheme));
  try {
    x.cert = certify(p, k, x.wave, certify_options(c));
  } catch (const Error& e) {
    x.cert_error = e.what();
  }
  return x;
}

inline void run_envelopes(Experiment& x, const ExperimentConfig& c) {
  const auto& p = x.params;
  const WaveProfile& w = x.wave;
  const Grid g = w.grid;
  const DiscreteKernel k(build_kernel_spec(c), g.spacing());
  Evolution ev = wave_evolution(p, k, w, x.frame);
  ev.path = c.evolution.convolution == "fft" ? ConvolutionPath::fft : ConvolutionPath::direct;
  x.dt = c.evolution.dt.value_or(ev.default_dt(g.spacing()));
  if (c.evolution.T) x.T = *c.evolution.T;
  else if (x.cert && x.cert->mu_max > 0) x.T = std::log(10.0) / x.cert->mu_max;
  else fail(ErrorCode::Config, "evolution.T = auto needs a certificate with positive decay rates");
  x.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.evolution.sample_dt / x.dt)));
  const WeightFunction wt = x.cert ? WeightFunction{x.cert->beta, x.cert->xi0} : WeightFunction{0.0, 0.0};

  const InitialData wave = wave_initial_data(w, p.tau, x.dt, x.frame);
  const Field pert = perturbation_shape(c, g, p.K);
  InitialData init = wave;
  for (auto& u : init.u1)
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::clamp(u[j] + pert[j], 0.0, p.K);
  for (std::size_t j = 0; j < g.size(); ++j)
    init.u2[j] = std::clamp(init.u2[j] + p.gamma1 / p.gamma2 * pert[j], 0.0, p.K2());

  std::vector<std::pair<std::string, InitialData>> data;
  if (c.evolution.envelope) {
    auto [up, lo] = envelope_split(init, wave);
    data.emplace_back("upper", std::move(up));
    data.emplace_back("lower", std::move(lo));
  } else {
    data.emplace_back("solution", std::move(init));
  }

  const bool moving = x.frame.is_moving();
  const Field phit_moving = shifted(w.phi1, g, w.closure1, w.c * p.tau);
  auto run_one = [&](const std::string& name, const InitialData& d) {
    EnvelopeRun r;
    r.name = name;
    r.sign = name == "lower" ? -1.0 : 1.0;
    const bool envelope = name != "solution";
    SimulateOptions o;
    o.stride = x.stride;
    o.observer = [&](const SimulationState& s) {
      Field phi1(g.size()), phi2(g.size()), phit(g.size()), v1(g.size()), v2(g.size()), vt(g.size());
      const double t = s.t;
      const Field ud = delayed_view(ev, g, s.history.sample(t - p.tau), t - p.tau);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double x_ = g.node(j);
        phi1[j] = moving ? w.phi1[j] : w.value1(x_ + w.c * t);
        phi2[j] = moving ? w.phi2[j] : w.value2(x_ + w.c * t);
        phit[j] = moving ? phit_moving[j] : w.value1(x_ + w.c * (t - p.tau));
        v1[j] = r.sign * (s.u1[j] - phi1[j]);
        v2[j] = r.sign * (s.u2[j] - phi2[j]);
        vt[j] = r.sign * (ud[j] - phit[j]);
      }
      r.series.push(t, v1, v2, wt, moving ? g : g.shifted(w.c * t));
      if (envelope) merge(r.q, q_sign_check(p, g, phi1, phit, v1, vt, r.sign));
    };
    r.traj = simulate(ev, d, x.T, x.dt, o);
    r.bounds = check_boundedness(r.traj, p, g);
    return r;
  };
  std::vector<std::future<EnvelopeRun>> jobs;
  for (const auto& [name, d] : data) jobs.push_back(std::async(std::launch::async, run_one, name, std::cref(d)));
  for (auto& j : jobs) x.runs.push_back(j.get());
  for (auto& r : x.runs) r.series.mu = x.cert ? x.cert->mu : 0.0;
  if (x.runs.size() == 2) x.comparison = check_comparison(x.runs[0].traj, x.runs[1].traj, g);
}

inline json experiment_header(const Experiment& x) {
  json j{{"frame", x.frame.is_moving() ? "moving" : "lab"}, {"c", x.wave.c}, {"T", x.T}, {"dt", x.dt}, {"stride", x.stride}};
  if (x.cert) {
    j["certificate"] = {{"valid", x.cert->valid}, {"beta", x.cert->beta}, {"xi0", x.cert->xi0}, {"mu1", x.cert->mu1},
                        {"mu2", x.cert->mu2}, {"mu", x.cert->mu}, {"c_threshold", x.cert->threshold.c_threshold}};
  } else {
    j["certificate"] = {{"valid", false}, {"error", x.cert_error}};
  }
  return j;
}

inline int cmd_simulate(const ExperimentConfig& c, const std::filesystem::path& out) {
  Manifest m(c, "simulate", out);
  Experiment x = prepare_experiment(c);
  run_envelopes(x, c);
  json j = experiment_header(x);
  j["config_hash"] = config_hash(c);
  bool ok = true;
  for (const auto& r : x.runs) {
    write_text(m.path("series_" + r.name + ".csv"), series_csv(r.series));
    j["runs"][r.name] = {{"boundedness", to_json(r.bounds)},
                         {"bounds", {r.traj.min_u1, r.traj.max_u1, r.traj.min_u2, r.traj.max_u2}}};
    ok = ok && r.bounds.pass;
    if (c.output.snapshots)
      for (std::size_t i = 0; i < r.traj.samples.size(); ++i) {
        const auto& s = r.traj.samples[i];
        write_text(m.path("snapshot_" + r.name + "_" + std::to_string(i) + ".txt"), field_dump(x.wave.grid, s.t, s.u1, s.u2));
      }
  }
  if (x.comparison) {
    j["comparison"] = to_json(*x.comparison);
    ok = ok && x.comparison->pass;
  }
  write_json(m.path("simulate.json"), j);
  const int code = ok ? kPass : kDomainFailure;
  m.write(code);
  return code;
}

inline int cmd_stability(const ExperimentConfig& c, const std::filesystem::path& out, const SeriesHook& hook = nullptr,
                         Status* status = nullptr) {
  Manifest m(c, "stability", out);
  json j{{"config_hash", config_hash(c)}};
  auto finish = [&](Status st, int code) {
    if (status) *status = st;
    j["status"] = to_string(st);
    write_json(m.path("verdict.json"), j);
    m.write(code);
    return code;
  };
  const ModelParams p = build_params(c);
  const Assumptions a = check_assumptions(p);
  j["assumptions"] = a.passed();
  if (!a.passed()) {
    j["reasons"] = {"assumption checks fail"};
    return finish(Status::fail, kDomainFailure);
  }
  Experiment x = prepare_experiment(c);
  if (!x.cert || !x.cert->valid) {
    j.update(experiment_header(x));
    j["reasons"] = {"certificate invalid"};
    if (x.cert) j["certificate_failures"] = x.cert->failures;
    return finish(Status::skipped, kDomainFailure);
  }
  if (!c.evolution.envelope) fail(ErrorCode::Config, "stability needs evolution.envelope = true");
  run_envelopes(x, c);
  j.update(experiment_header(x));
  bool all = true;
  for (auto& r : x.runs) {
    if (hook) hook(r.series);
    write_text(m.path("series_" + r.name + ".csv"), series_csv(r.series));
    TheoremOptions o;
    o.amplification = c.analysis.amplification;
    o.window_start_fraction = c.analysis.window_start;
    const TheoremVerdict v = verify_theorem(r.series, *x.cert, x.cert->mu, o);
    j["runs"][r.name] = {{"theorem", to_json(v)}, {"q_sign", to_json(r.q)}, {"boundedness", to_json(r.bounds)}};
    all = all && v.status == Status::pass && r.bounds.pass;
  }
  if (x.comparison) {
    j["comparison"] = to_json(*x.comparison);
    all = all && x.comparison->pass;
  }
  return finish(all ? Status::pass : Status::fail, all ? kPass : kDomainFailure);
}

inline int cmd_bench(const ExperimentConfig& c, const std::filesystem::path& out) {
  Manifest m(c, "bench", out);
  const ModelParams p = build_params(c);
  const double h = c.grid.h;
  const DiscreteKernel k(build_kernel_spec(c), h);
  std::mt19937_64 rng(c.evolution.seed);
  json j{{"threads", max_threads()}, {"kernel_half_width", k.half_width()}, {"h", h}};
  j["sizes"] = json::array();
  bool agree = true;
  using clock = std::chrono::steady_clock;
  for (int e = 10; e <= 15; ++e) {
    const std::size_t n = std::size_t{1} << e;
    const Grid g(0.0, h * static_cast<double>(n - 1), n);
    const Field u = random_field(g, p.K, RandomShape::noise, rng);
    const Closure bc = Closure::clamps(0.0, p.K);
    const int reps = std::max(1, static_cast<int>(20000000 / (n * k.weights().size())));
    auto time = [&](auto&& fn) {
      const auto t0 = clock::now();
      for (int r = 0; r < reps; ++r) fn();
      return std::chrono::duration<double, std::milli>(clock::now() - t0).count() / reps;
    };
    Field a, b;
    const double td = time([&] { a = convolve(k, u, g, bc); });
    const double tf = time([&] { b = convolve_fft(k, u, g, bc); });
    double diff = 0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    const Evolution ev = clamped_evolution(p, k, Frame::lab());
    const Field u2(n, 0.5 * p.K2());
    const double tr = time([&] { (void)rhs(ev, g, 0.0, u, u2, u); });
    agree = agree && diff <= 1e-12;
    j["sizes"].push_back({{"n", n}, {"direct_ms", td}, {"fft_ms", tf}, {"rhs_ms", tr}, {"max_diff", diff}});
  }
  j["agreement"] = agree;
  write_json(m.path("bench.json"), j);
  const int code = agree ? kPass : kDomainFailure;
  m.write(code);
  return code;
}

// Runs one subcommand and maps errors onto the exit-code contract.
// status, when given, receives the stability verdict; other commands leave it untouched.
inline int run_command(const std::string& name, const ExperimentConfig& c, const std::filesystem::path& out,
                       Status* status = nullptr) {
  try {
    if (name == "check") return cmd_check(c, out);
    if (name == "wave") return cmd_wave(c, out);
    if (name == "certify") return cmd_certify(c, out);
    if (name == "simulate") return cmd_simulate(c, out);
    if (name == "stability") return cmd_stability(c, out, nullptr, status);
    if (name == "bench") return cmd_bench(c, out);
    std::cerr << "unknown command " << name << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    const auto code = e.code();
    return code == ErrorCode::Config || code == ErrorCode::Io || code == ErrorCode::InvalidArgument ? kUsageError
                                                                                                    : kDomainFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

}  // namespace nlwave

#endif
