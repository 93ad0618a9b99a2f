#ifndef NLWAVE_MODEL_HPP
#define NLWAVE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nlwave/reaction.hpp"

namespace nlwave {

struct ModelParams {
  double D = 1.0;
  double gamma1 = 0.1;
  double gamma2 = 0.2;
  double tau = 0.0;
  Reaction reaction;
  double K = 0.0;
  // Suprema of |d1 f|, |d2 f| on [0,K]^2, sampled once.
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;

  static ModelParams make(double D, double gamma1, double gamma2, double tau, Reaction f, double u_max = 10.0) {
    require(D > 0 && gamma1 > 0 && gamma2 > 0, "rates D, gamma1, gamma2 must be positive");
    require(tau >= 0 && std::isfinite(tau), "delay must be nonnegative");
    require(static_cast<bool>(f), "reaction missing");
    ModelParams p;
    p.D = D;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.tau = tau;
    p.reaction = std::move(f);
    p.K = carrying_capacity(p.reaction, u_max);
    p.refresh_bounds();
    return p;
  }

  // Variant with K imposed, for degenerate inputs in checker tests.
  static ModelParams with_K(double D, double gamma1, double gamma2, double tau, Reaction f, double K) {
    ModelParams p;
    p.D = D;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.tau = tau;
    p.reaction = std::move(f);
    p.K = K;
    p.refresh_bounds();
    return p;
  }

  void refresh_bounds(int samples = 201) {
    sup_d1 = sup_d2 = 0.0;
    for (int i = 0; i < samples; ++i)
      for (int j = 0; j < samples; ++j) {
        const auto r = reaction.all(K * i / (samples - 1), K * j / (samples - 1));
        sup_d1 = std::max(sup_d1, std::abs(r.f1));
        sup_d2 = std::max(sup_d2, std::abs(r.f2));
      }
  }

  std::pair<double, double> u_plus() const { return {K, gamma1 * K / gamma2}; }
  std::pair<double, double> u_minus() const { return {0.0, 0.0}; }
  double K2() const { return gamma1 * K / gamma2; }
};

struct ConditionVerdict {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // signed; violation when beyond the slack
  double u = 0.0, v = 0.0;
};

struct AssumptionReport {
  std::string name;
  std::vector<ConditionVerdict> conditions;
  int samples = 0;
  bool resolution_sensitive = false;

  bool passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionVerdict& c) { return c.pass; });
  }
  const ConditionVerdict* worst_failure() const {
    for (const auto& c : conditions)
      if (!c.pass) return &c;
    return nullptr;
  }
};

namespace detail {

constexpr double kSlack = 1e-10;

// Tracks the largest value of a quantity that must stay <= 0 (sign = +1) or >= 0 (sign = -1).
struct Tracker {
  ConditionVerdict v;
  double sign;
  Tracker(std::string name, double sign_) : sign(sign_) {
    v.name = std::move(name);
    v.worst = -INFINITY;
  }
  void see(double value, double u, double w, double slack = kSlack) {
    const double s = sign * value;
    if (s > v.worst) {
      v.worst = s;
      v.u = u;
      v.v = w;
    }
    if (s > slack) v.pass = false;
  }
  ConditionVerdict done() {
    ConditionVerdict out = v;
    out.worst = sign * v.worst;
    return out;
  }
};

inline AssumptionReport run_A1(const Reaction& f, double K, int n) {
  AssumptionReport rep;
  rep.name = "A1";
  rep.samples = n;
  ConditionVerdict z{"f(0,0)=0", std::abs(f(0, 0)) <= kSlack, f(0, 0), 0, 0};
  ConditionVerdict k{"f(K,K)=0", std::abs(f(K, K)) <= kSlack, f(K, K), K, K};
  Tracker diag("f(u,u)>0 interior", -1.0);
  Tracker d2("d2f>=0", -1.0), d11("d11f<=0", 1.0), d12("d12f<=0", 1.0), d22("d22f<=0", 1.0);
  for (int i = 0; i < n; ++i) {
    const double u = K * i / (n - 1);
    if (i > 0 && i < n - 1) diag.see(f(u, u), u, u, 0.0);
    for (int j = 0; j < n; ++j) {
      const double v = K * j / (n - 1);
      const auto r = f.all(u, v);
      d2.see(r.f2, u, v);
      d11.see(r.f11, u, v);
      d12.see(r.f12, u, v);
      d22.see(r.f22, u, v);
    }
  }
  // Interior positivity is strict: a zero value is a failure.
  auto dv = diag.done();
  if (n > 2 && !(dv.worst > 0)) dv.pass = false;
  rep.conditions = {z, k, dv, d2.done(), d11.done(), d12.done(), d22.done()};
  return rep;
}

inline AssumptionReport run_A2(const Reaction& f, double K, int n) {
  AssumptionReport rep;
  rep.name = "A2";
  rep.samples = n;
  const auto rK = f.all(K, K);
  const double s = rK.f1 + rK.f2;
  ConditionVerdict neg{"d1f(K,K)+d2f(K,K)<0", s < 0, s, K, K};
  const auto r0 = f.all(0, 0);
  Tracker sub("d1f(0,0)u+d2f(0,0)v>=f(u,v)", 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = K * i / (n - 1), v = K * j / (n - 1);
      sub.see(f(u, v) - (r0.f1 * u + r0.f2 * v), u, v);
    }
  rep.conditions = {neg, sub.done()};
  return rep;
}

template <class Run>
AssumptionReport refined(Run run, const Reaction& f, double K, int samples) {
  require(samples >= 2, "need at least 2 samples per axis");
  AssumptionReport coarse = run(f, K, samples);
  AssumptionReport fine = run(f, K, 2 * samples - 1);
  if (coarse.passed() && !fine.passed()) {
    fine.resolution_sensitive = true;
    return fine;
  }
  return coarse;
}

}  // namespace detail

inline AssumptionReport check_A1(const Reaction& f, double K, int samples = 201) {
  return detail::refined(detail::run_A1, f, K, samples);
}
inline AssumptionReport check_A2(const Reaction& f, double K, int samples = 201) {
  return detail::refined(detail::run_A2, f, K, samples);
}

struct GapReport {
  bool gap_holds = false;
  double gap_margin = 0.0;  // (gamma1 - 3 gamma2) - (d1f(K,K) + d2f(K,K))
  bool ordering_holds = false;
  double ordering_margin = 0.0;  // gamma2 - gamma1
  bool passed() const { return gap_holds && ordering_holds; }
};

inline GapReport check_quiescence_gap(const ModelParams& p) {
  const auto r = p.reaction.all(p.K, p.K);
  GapReport g;
  g.gap_margin = (p.gamma1 - 3.0 * p.gamma2) - (r.f1 + r.f2);
  g.gap_holds = g.gap_margin > 0;
  g.ordering_margin = p.gamma2 - p.gamma1;
  g.ordering_holds = g.ordering_margin > 0;
  return g;
}

}  // namespace nlwave

#endif
