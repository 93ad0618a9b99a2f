#ifndef NLWAVE_EVOLUTION_HPP
#define NLWAVE_EVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nlwave/fft_convolve.hpp"
#include "nlwave/model.hpp"
#include "nlwave/wavefront.hpp"

namespace nlwave {

enum class FrameKind { lab, moving };

struct Frame {
  FrameKind kind = FrameKind::lab;
  double c = 0.0;
  static Frame lab() { return {FrameKind::lab, 0.0}; }
  static Frame moving(double c) {
    require(c > 0, "moving frame needs c > 0");
    return {FrameKind::moving, c};
  }
  bool is_moving() const { return kind == FrameKind::moving; }
};

// u1 snapshots on [-tau, 0] (increasing times ending at 0) and u2 at t = 0.
struct InitialData {
  Grid grid;
  std::vector<double> times;
  std::vector<Field> u1;
  Field u2;
};

inline std::vector<double> history_times(double tau, double dt) {
  if (tau == 0.0) return {0.0};
  const auto N = static_cast<std::size_t>(std::ceil(tau / dt - 1e-9));
  std::vector<double> t(N + 1);
  for (std::size_t i = 0; i <= N; ++i) t[i] = -tau + tau * static_cast<double>(i) / static_cast<double>(N);
  t.back() = 0.0;
  return t;
}

inline InitialData constant_history(const Grid& g, double tau, double dt, const Field& u1, const Field& u2) {
  InitialData d{g, history_times(tau, dt), {}, u2};
  d.u1.assign(d.times.size(), u1);
  return d;
}

// The front itself as initial data: phi(x + c s) in the lab frame, phi(xi) in the moving frame.
inline InitialData wave_initial_data(const WaveProfile& w, double tau, double dt, Frame frame, const Grid* grid = nullptr) {
  const Grid& g = grid ? *grid : w.grid;
  InitialData d{g, history_times(tau, dt), {}, Field(g.size())};
  for (double s : d.times) {
    Field u(g.size());
    const double off = frame.is_moving() ? 0.0 : w.c * s;
    for (std::size_t j = 0; j < g.size(); ++j) u[j] = w.value1(g.node(j) + off);
    d.u1.push_back(std::move(u));
  }
  for (std::size_t j = 0; j < g.size(); ++j) d.u2[j] = w.value2(g.node(j));
  return d;
}

inline std::pair<InitialData, InitialData> envelope_split(const InitialData& init, const InitialData& wave) {
  require(init.times.size() == wave.times.size() && init.u2.size() == wave.u2.size(), "envelope inputs differ in shape");
  InitialData up = init, lo = init;
  for (std::size_t s = 0; s < init.u1.size(); ++s)
    for (std::size_t j = 0; j < init.u2.size(); ++j) {
      up.u1[s][j] = std::max(init.u1[s][j], wave.u1[s][j]);
      lo.u1[s][j] = std::min(init.u1[s][j], wave.u1[s][j]);
    }
  for (std::size_t j = 0; j < init.u2.size(); ++j) {
    up.u2[j] = std::max(init.u2[j], wave.u2[j]);
    lo.u2[j] = std::min(init.u2[j], wave.u2[j]);
  }
  return {up, lo};
}

// Portable uniform on [0,1): the top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class RandomShape { noise, smooth, steps };

// Field with values in [0, top]: per-node noise, a few random Fourier modes, or random plateaus.
inline Field random_field(const Grid& g, double top, RandomShape shape, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  Field u(n);
  if (shape == RandomShape::noise) {
    for (auto& x : u) x = top * uniform01(rng);
  } else if (shape == RandomShape::smooth) {
    const double L = g.x_max() - g.x_min();
    double a[6], ph[6];
    for (int m = 0; m < 6; ++m) {
      a[m] = uniform01(rng) / (m + 1);
      ph[m] = 2 * M_PI * uniform01(rng);
    }
    const double base = uniform01(rng);
    for (std::size_t j = 0; j < n; ++j) {
      double v = base;
      for (int m = 0; m < 6; ++m) v += a[m] * std::sin(2 * M_PI * (m + 1) * (g.node(j) - g.x_min()) / L + ph[m]);
      u[j] = top * std::clamp(v, 0.0, 1.0);
    }
  } else {
    std::size_t j = 0;
    while (j < n) {
      const auto len = 1 + static_cast<std::size_t>(uniform01(rng) * 200);
      const double v = top * uniform01(rng);
      for (std::size_t i = 0; i < len && j < n; ++i) u[j++] = v;
    }
  }
  return u;
}

// Independent random snapshots on [-tau, 0] and a random u2, inside [u-, u+].
inline InitialData random_initial_data(const Grid& g, double tau, double dt, double K, double K2, RandomShape shape,
                                       std::mt19937_64& rng) {
  InitialData d{g, history_times(tau, dt), {}, {}};
  for (std::size_t i = 0; i < d.times.size(); ++i) d.u1.push_back(random_field(g, K, shape, rng));
  d.u2 = random_field(g, K2, shape, rng);
  return d;
}

class HistoryBuffer {
 public:
  void push(double t, Field u) {
    if (!t_.empty() && !(t > t_.back())) fail(ErrorCode::InvalidArgument, "history times must increase");
    t_.push_back(t);
    u_.push_back(std::move(u));
  }

  // Linear interpolation in time.
  Field sample(double t) const {
    if (t_.empty()) fail(ErrorCode::HistoryUnderflow, "empty history");
    const double eps = 1e-10 * std::max(1.0, std::abs(t));
    if (t < t_.front() - eps) fail(ErrorCode::HistoryUnderflow, "t=" + std::to_string(t) + " precedes the buffer");
    if (t > t_.back() + eps) fail(ErrorCode::HistoryUnderflow, "t=" + std::to_string(t) + " is after the buffer");
    auto it = std::lower_bound(t_.begin(), t_.end(), t - eps);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    if (std::abs(t_[i] - t) <= eps) return u_[i];
    const double th = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
    Field out(u_[i].size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - th) * u_[i - 1][j] + th * u_[i][j];
    return out;
  }

  // Drops snapshots no longer needed for times >= t_min.
  void trim(double t_min) {
    while (t_.size() >= 2 && t_[1] <= t_min + 1e-10 * std::max(1.0, std::abs(t_min))) {
      t_.pop_front();
      u_.pop_front();
    }
  }

  std::size_t size() const { return t_.size(); }
  double front_time() const { return t_.front(); }
  double back_time() const { return t_.back(); }
  double span() const { return t_.empty() ? 0.0 : t_.back() - t_.front(); }

 private:
  std::deque<double> t_;
  std::deque<Field> u_;
};

struct SimulationState {
  Grid grid;
  double t = 0.0;
  std::size_t step = 0;
  Field u1, u2;
  HistoryBuffer history;
  Frame frame;
};

struct Evolution {
  ModelParams params;
  DiscreteKernel kernel;
  Frame frame;
  Closure bc1 = Closure::clamps(0.0, 0.0);
  Closure bc2 = Closure::clamps(0.0, 0.0);
  ConvolutionPath path = ConvolutionPath::direct;

  double c() const { return frame.is_moving() ? frame.c : 0.0; }
  double accuracy_dt_bound(double h) const {
    const auto& p = params;
    return 0.9 / (p.D + p.gamma1 + p.gamma2 + p.sup_d1 + p.sup_d2 + c() / h);
  }
  double positivity_dt_bound(double h) const {
    const auto& p = params;
    return 1.0 / (p.D + p.gamma1 + p.sup_d1 + c() / h);
  }
  double dt_max(double h) const { return std::min(accuracy_dt_bound(h), positivity_dt_bound(h)); }
  // Largest dt <= dt_max dividing tau.
  double default_dt(double h) const {
    const double b = dt_max(h);
    if (params.tau == 0.0) return b;
    return params.tau / std::ceil(params.tau / b);
  }
};

// Closures that keep the front's far field; in the lab frame the left data is the translated wave itself.
inline Evolution wave_evolution(const ModelParams& p, const DiscreteKernel& k, const WaveProfile& w, Frame f) {
  Evolution ev{p, k, f, w.closure1, w.closure2, ConvolutionPath::direct};
  if (!f.is_moving()) {
    const double x0 = w.grid.x_min(), h = w.grid.spacing();
    ev.bc1.left.drift = w.c;
    ev.bc2.left.drift = w.c;
    ev.bc1.left.track = std::make_shared<const FarFieldTrack>(FarFieldTrack{x0, h, w.phi1, w.K});
    ev.bc2.left.track = std::make_shared<const FarFieldTrack>(FarFieldTrack{x0, h, w.phi2, w.K2});
  }
  return ev;
}

inline Evolution clamped_evolution(const ModelParams& p, const DiscreteKernel& k, Frame f) {
  return {p, k, f, Closure::clamps(0.0, p.K), Closure::clamps(0.0, p.K2()), ConvolutionPath::direct};
}

// u1(t - tau, .) as used by the rhs: spatially shifted by c tau in the moving frame.
inline Field delayed_view(const Evolution& ev, const Grid& g, const Field& raw, double t_delayed) {
  if (!ev.frame.is_moving()) return raw;
  return shifted(raw, g, ev.bc1, ev.frame.c * ev.params.tau, t_delayed);
}

inline std::pair<Field, Field> rhs(const Evolution& ev, const Grid& g, double t, const Field& u1, const Field& u2,
                                   const Field& delayed) {
  const auto& p = ev.params;
  if (u1.size() != g.size() || u2.size() != g.size() || delayed.size() != g.size())
    fail(ErrorCode::InvalidArgument, "field length does not match grid");
  const Field conv = convolve(ev.kernel, u1, g, ev.bc1, ev.path, t);
  const std::size_t n = g.size();
  Field d1(n), d2(n);
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    d1[j] = p.D * (conv[j] - u1[j]) + p.reaction(u1[j], delayed[j]) - p.gamma1 * u1[j] + p.gamma2 * u2[j];
    d2[j] = p.gamma1 * u1[j] - p.gamma2 * u2[j];
  }
  if (ev.frame.is_moving()) {
    const double a = ev.frame.c / g.spacing();
    const double xl = g.x_min() - g.spacing();
    double prev1 = ev.bc1.left(xl, t), prev2 = ev.bc2.left(xl, t);
    for (std::size_t j = 0; j < n; ++j) {
      d1[j] -= a * (u1[j] - prev1);
      d2[j] -= a * (u2[j] - prev2);
      prev1 = u1[j];
      prev2 = u2[j];
    }
  }
  return {std::move(d1), std::move(d2)};
}

inline SimulationState initial_state(const Evolution& ev, const InitialData& d) {
  require(!d.times.empty() && d.times.size() == d.u1.size(), "initial history is empty or inconsistent");
  require(std::abs(d.times.back()) <= 1e-12, "initial history must end at t = 0");
  require(ev.params.tau == 0.0 || d.times.front() <= -ev.params.tau + 1e-12, "initial history must cover [-tau, 0]");
  SimulationState s;
  s.grid = d.grid;
  s.frame = ev.frame;
  s.u1 = d.u1.back();
  s.u2 = d.u2;
  for (std::size_t i = 0; i < d.times.size(); ++i) s.history.push(d.times[i], d.u1[i]);
  return s;
}

inline void step(SimulationState& s, const Evolution& ev, double dt) {
  const double h = s.grid.spacing();
  const double tau = ev.params.tau;
  if (!(dt > 0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  if (dt > ev.dt_max(h) * (1 + 1e-12))
    fail(ErrorCode::StabilityBound, "dt=" + std::to_string(dt) + " exceeds " + std::to_string(ev.dt_max(h)));
  if (tau > 0 && dt > tau * (1 + 1e-12)) fail(ErrorCode::HistoryUnderflow, "dt larger than the delay");
  const double t = s.t;
  const std::size_t n = s.grid.size();
  auto delayed = [&](double ts, const Field& stage) {
    if (tau == 0.0) return delayed_view(ev, s.grid, stage, ts);
    return delayed_view(ev, s.grid, s.history.sample(ts - tau), ts - tau);
  };
  auto axpy = [n](const Field& a, double c, const Field& b) {
    Field o(n);
    for (std::size_t j = 0; j < n; ++j) o[j] = a[j] + c * b[j];
    return o;
  };
  const auto k1 = rhs(ev, s.grid, t, s.u1, s.u2, delayed(t, s.u1));
  const Field a1 = axpy(s.u1, dt / 2, k1.first), a2 = axpy(s.u2, dt / 2, k1.second);
  const auto k2 = rhs(ev, s.grid, t + dt / 2, a1, a2, delayed(t + dt / 2, a1));
  const Field b1 = axpy(s.u1, dt / 2, k2.first), b2 = axpy(s.u2, dt / 2, k2.second);
  const auto k3 = rhs(ev, s.grid, t + dt / 2, b1, b2, delayed(t + dt / 2, b1));
  const Field e1 = axpy(s.u1, dt, k3.first), e2 = axpy(s.u2, dt, k3.second);
  const auto k4 = rhs(ev, s.grid, t + dt, e1, e2, delayed(t + dt, e1));
  for (std::size_t j = 0; j < n; ++j) {
    s.u1[j] += dt / 6 * (k1.first[j] + 2 * k2.first[j] + 2 * k3.first[j] + k4.first[j]);
    s.u2[j] += dt / 6 * (k1.second[j] + 2 * k2.second[j] + 2 * k3.second[j] + k4.second[j]);
    if (!std::isfinite(s.u1[j]) || !std::isfinite(s.u2[j]))
      fail(ErrorCode::NonFinite, "non-finite value at x=" + std::to_string(s.grid.node(j)));
  }
  ++s.step;
  s.t = static_cast<double>(s.step) * dt;
  s.history.push(s.t, s.u1);
  s.history.trim(s.t - tau);
}

struct Sample {
  double t = 0.0;
  Field u1, u2;
};

struct Trajectory {
  std::vector<Sample> samples;
  double dt = 0.0;
  std::size_t stride = 1;
  double min_u1 = INFINITY, max_u1 = -INFINITY, min_u2 = INFINITY, max_u2 = -INFINITY;
  SimulationState final_state;
};

using Observer = std::function<void(const SimulationState&)>;

struct SimulateOptions {
  std::size_t stride = 1;
  bool store = true;
  Observer observer;
};

inline Trajectory simulate(const Evolution& ev, const InitialData& init, double T, double dt,
                           const SimulateOptions& o = {}) {
  require(T >= 0, "T must be nonnegative");
  require(o.stride >= 1, "stride must be positive");
  SimulationState s = initial_state(ev, init);
  Trajectory tr;
  tr.dt = dt;
  tr.stride = o.stride;
  const double ratio = T / dt;
  const auto steps = static_cast<std::size_t>(std::abs(ratio - std::round(ratio)) < 1e-9 ? std::round(ratio)
                                                                                          : std::ceil(ratio));
  auto bounds = [&]() {
    for (std::size_t j = 0; j < s.u1.size(); ++j) {
      tr.min_u1 = std::min(tr.min_u1, s.u1[j]);
      tr.max_u1 = std::max(tr.max_u1, s.u1[j]);
      tr.min_u2 = std::min(tr.min_u2, s.u2[j]);
      tr.max_u2 = std::max(tr.max_u2, s.u2[j]);
    }
  };
  auto record = [&]() {
    if (o.store) tr.samples.push_back({s.t, s.u1, s.u2});
    if (o.observer) o.observer(s);
  };
  bounds();
  record();
  for (std::size_t k = 0; k < steps; ++k) {
    step(s, ev, dt);
    bounds();
    if (s.step % o.stride == 0 || s.step == steps) record();
  }
  tr.final_state = std::move(s);
  return tr;
}

struct OrderVerdict {
  bool pass = true;
  double worst = 0.0;  // largest excursion (positive means violation beyond 0)
  double t = 0.0, x = 0.0;
  int component = 0;
};

inline OrderVerdict check_boundedness(const Trajectory& tr, const ModelParams& p, const Grid& g, double delta = 1e-8) {
  OrderVerdict v;
  v.worst = -INFINITY;
  const double hi[2] = {p.K, p.K2()};
  for (const auto& s : tr.samples)
    for (int c = 0; c < 2; ++c) {
      const Field& u = c == 0 ? s.u1 : s.u2;
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double e = std::max(-u[j], u[j] - hi[c]);
        if (e > v.worst) v = {true, e, s.t, g.node(j), c + 1};
      }
    }
  v.pass = v.worst <= delta;
  return v;
}

inline OrderVerdict check_comparison(const Trajectory& upper, const Trajectory& lower, const Grid& g, double delta = 1e-8) {
  require(upper.samples.size() == lower.samples.size(), "trajectories have different sample counts");
  OrderVerdict v;
  v.worst = -INFINITY;
  for (std::size_t i = 0; i < upper.samples.size(); ++i) {
    const auto& a = upper.samples[i];
    const auto& b = lower.samples[i];
    require(std::abs(a.t - b.t) <= 1e-12 * std::max(1.0, a.t), "trajectories sampled at different times");
    for (int c = 0; c < 2; ++c) {
      const Field& hi = c == 0 ? a.u1 : a.u2;
      const Field& lo = c == 0 ? b.u1 : b.u2;
      for (std::size_t j = 0; j < hi.size(); ++j) {
        const double e = lo[j] - hi[j];
        if (e > v.worst) v = {true, e, a.t, g.node(j), c + 1};
      }
    }
  }
  v.pass = v.worst <= delta;
  return v;
}

}  // namespace nlwave

#endif
