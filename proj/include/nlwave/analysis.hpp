#ifndef NLWAVE_ANALYSIS_HPP
#define NLWAVE_ANALYSIS_HPP

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nlwave/certificate.hpp"
#include "nlwave/evolution.hpp"

namespace nlwave {

inline Field derivative(const Field& f, double h) {
  const std::size_t n = f.size();
  Field d(n, 0.0);
  if (n < 2) return d;
  d[0] = (f[1] - f[0]) / h;
  d[n - 1] = (f[n - 1] - f[n - 2]) / h;
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2 * h);
  return d;
}

inline double weighted_norm(const Field& f, const WeightFunction& w, const Grid& g, int order = 0) {
  require(f.size() == g.size(), "field length does not match grid");
  require(order == 0 || order == 1, "norm order must be 0 or 1");
  const double h = g.spacing();
  const Field d = order == 1 ? derivative(f, h) : Field{};
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double a = f[j] * f[j];
    if (order == 1) a += d[j] * d[j];
    s += w(g.node(j)) * a;
  }
  return std::sqrt(h * s);
}

inline double sup_norm(const Field& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

// v = u - translated front; the moving frame subtracts directly, the lab frame interpolates phi at x + c t.
inline std::pair<Field, Field> perturbation(const Field& u1, const Field& u2, double t, const WaveProfile& w,
                                            const Grid& g, Frame frame) {
  require(u1.size() == g.size() && u2.size() == g.size(), "field length does not match grid");
  Field v1(g.size()), v2(g.size());
  const double off = frame.is_moving() ? 0.0 : w.c * t;
  const bool same = frame.is_moving() && g.size() == w.grid.size() && std::abs(g.x_min() - w.grid.x_min()) < 1e-12 &&
                    std::abs(g.spacing() - w.grid.spacing()) < 1e-15;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double p1 = same ? w.phi1[j] : w.value1(g.node(j) + off);
    const double p2 = same ? w.phi2[j] : w.value2(g.node(j) + off);
    v1[j] = u1[j] - p1;
    v2[j] = u2[j] - p2;
  }
  return {v1, v2};
}

struct QReport {
  double max_Q = -INFINITY;
  double xi_at_max = 0.0;
  double max_identity_error = 0.0;
  bool pass = true;
};

// Taylor remainder of f about (phi, phit) in the direction sign*(v, vt), phit = phi1(xi - c tau).
// Q comes from the integral form of the remainder; P - (linear + Q) checks the algebra.
inline QReport q_sign_check(const ModelParams& p, const Grid& g, const Field& phi, const Field& phit, const Field& v1,
                            const Field& v1_delayed, double sign = 1.0, double q_tol = 1e-9, double id_tol = 1e-12) {
  require(phi.size() == g.size() && phit.size() == g.size() && v1.size() == g.size() && v1_delayed.size() == g.size(),
          "field length does not match grid");
  QReport r;
  for (std::size_t j = 0; j < v1.size(); ++j) {
    const double a = phi[j], b = phit[j];
    const double x = sign * v1[j], y = sign * v1_delayed[j];
    const auto r0 = p.reaction.all(a, b);
    const double P = p.reaction(a + x, b + y) - r0.f;
    const double lin = r0.f1 * x + r0.f2 * y;
    const double Q = boost::math::quadrature::gauss<double, 10>::integrate(
        [&](double s) {
          const auto rs = p.reaction.all(a + s * x, b + s * y);
          return (1.0 - s) * (rs.f11 * x * x + 2 * rs.f12 * x * y + rs.f22 * y * y);
        },
        0.0, 1.0);
    if (Q > r.max_Q) {
      r.max_Q = Q;
      r.xi_at_max = g.node(j);
    }
    r.max_identity_error = std::max(r.max_identity_error, std::abs(P - (lin + Q)));
  }
  r.pass = r.max_Q <= q_tol && r.max_identity_error <= id_tol;
  return r;
}

inline QReport q_sign_check(const ModelParams& p, const WaveProfile& w, const Field& v1, const Field& v1_delayed,
                            double sign = 1.0) {
  return q_sign_check(p, w.grid, w.phi1, shifted(w.phi1, w.grid, w.closure1, w.c * p.tau), v1, v1_delayed, sign);
}

inline void merge(QReport& into, const QReport& r) {
  if (r.max_Q > into.max_Q) {
    into.max_Q = r.max_Q;
    into.xi_at_max = r.xi_at_max;
  }
  into.max_identity_error = std::max(into.max_identity_error, r.max_identity_error);
  into.pass = into.pass && r.pass;
}

struct DecayFit {
  double mu = 0.0;
  double amplitude = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

// Least-squares line through (t, log value) on [ta, tb]; mu = -slope.
inline DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& v, double ta, double tb,
                               double floor = 1e-14) {
  require(t.size() == v.size(), "times and values differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < ta - 1e-12 || t[i] > tb + 1e-12) continue;
    if (!(v[i] > floor)) fail(ErrorCode::NoiseFloor, "value " + std::to_string(v[i]) + " at t=" + std::to_string(t[i]));
    x.push_back(t[i]);
    y.push_back(std::log(v[i]));
  }
  if (x.size() < 10) fail(ErrorCode::WindowTooSparse, std::to_string(x.size()) + " samples in window");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit f;
  const double slope = sxy / sxx;
  f.mu = -slope;
  f.amplitude = std::exp(my - slope * mx);
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.samples = x.size();
  return f;
}

struct PerturbationSeries {
  std::vector<double> t;
  std::array<std::vector<double>, 2> L2w, H1w, sup;
  double mu = 0.0;

  void push(double time, const Field& v1, const Field& v2, const WeightFunction& w, const Grid& g) {
    if (!t.empty() && !(time > t.back())) fail(ErrorCode::InvalidArgument, "series times must increase");
    t.push_back(time);
    const Field* v[2] = {&v1, &v2};
    for (int i = 0; i < 2; ++i) {
      L2w[i].push_back(weighted_norm(*v[i], w, g, 0));
      H1w[i].push_back(weighted_norm(*v[i], w, g, 1));
      sup[i].push_back(sup_norm(*v[i]));
    }
  }
};

enum class Status { pass, fail, skipped };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    default: return "SKIPPED";
  }
}

struct ComponentVerdict {
  double amplification = 0.0;
  double mu_fit = 0.0, r2 = 0.0;
  double mu_sup = 0.0;
  bool a = false, b = false, c = false;
  std::string note;
};

struct TheoremVerdict {
  Status status = Status::fail;
  double mu = 0.0;
  double window_start = 0.0, window_end = 0.0;
  std::array<ComponentVerdict, 2> component;
  std::vector<std::string> reasons;
  std::vector<std::string> warnings;
};

struct TheoremOptions {
  double amplification = 10.0;
  double window_start_fraction = 0.5;
};

inline TheoremVerdict verify_theorem(const PerturbationSeries& s, const StabilityCertificate& cert, double mu,
                                     const TheoremOptions& o = {}) {
  TheoremVerdict v;
  v.mu = mu;
  if (!cert.valid) {
    v.status = Status::skipped;
    v.reasons.push_back("certificate invalid");
    return v;
  }
  if (!(mu > 0 && mu < cert.mu_max)) {
    v.reasons.push_back("mu outside (0, min(mu1, mu2))");
    return v;
  }
  if (s.t.size() < 2) {
    v.reasons.push_back("series too short");
    return v;
  }
  const double T = s.t.back();
  v.window_start = s.t.front() + o.window_start_fraction * (T - s.t.front());
  v.window_end = T;
  bool all = true;
  for (int i = 0; i < 2; ++i) {
    auto& c = v.component[static_cast<std::size_t>(i)];
    const auto& H = s.H1w[static_cast<std::size_t>(i)];
    double peak = 0.0;
    for (std::size_t k = 0; k < H.size(); ++k) peak = std::max(peak, std::exp(mu * s.t[k]) * H[k]);
    c.amplification = H[0] > 0 ? peak / H[0] : (peak > 0 ? INFINITY : 1.0);
    c.a = c.amplification <= o.amplification;
    try {
      const auto f = fit_decay_rate(s.t, H, v.window_start, v.window_end);
      c.mu_fit = f.mu;
      c.r2 = f.r2;
      c.b = f.mu >= mu;
      const auto g = fit_decay_rate(s.t, s.sup[static_cast<std::size_t>(i)], v.window_start, v.window_end);
      c.mu_sup = g.mu;
      c.c = g.mu >= mu;
    } catch (const Error& e) {
      c.note = e.what();
    }
    const std::string tag = "component " + std::to_string(i + 1) + ": ";
    if (!c.a) v.reasons.push_back(tag + "FAIL(a) amplification " + std::to_string(c.amplification));
    if (!c.b) v.reasons.push_back(tag + "FAIL(b) H1w rate " + std::to_string(c.mu_fit));
    if (!c.c) v.reasons.push_back(tag + "FAIL(c) sup rate " + std::to_string(c.mu_sup));
    if (!c.note.empty()) v.reasons.push_back(tag + c.note);
    if ((c.a || c.b || c.c) && !(c.a && c.b && c.c))
      v.warnings.push_back(tag + "conclusions (a), (b), (c) disagree; check resolution");
    all = all && c.a && c.b && c.c;
  }
  v.status = all ? Status::pass : Status::fail;
  return v;
}

}  // namespace nlwave

#endif
