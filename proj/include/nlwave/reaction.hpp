#ifndef NLWAVE_REACTION_HPP
#define NLWAVE_REACTION_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "nlwave/error.hpp"

namespace nlwave {

struct ReactionValues {
  double f = 0, f1 = 0, f2 = 0, f11 = 0, f12 = 0, f22 = 0;
};

// f(u, v) with v the delayed density; analytic partials supplied by the builder.
class Reaction {
 public:
  using Eval = std::function<ReactionValues(double, double)>;

  Reaction() = default;
  Reaction(std::string name, std::map<std::string, double> params, Eval eval)
      : name_(std::move(name)), params_(std::move(params)), eval_(std::move(eval)) {}

  ReactionValues all(double u, double v) const { return eval_(u, v); }
  double operator()(double u, double v) const { return eval_(u, v).f; }
  double d1(double u, double v) const { return eval_(u, v).f1; }
  double d2(double u, double v) const { return eval_(u, v).f2; }
  double d11(double u, double v) const { return eval_(u, v).f11; }
  double d12(double u, double v) const { return eval_(u, v).f12; }
  double d22(double u, double v) const { return eval_(u, v).f22; }

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

 private:
  std::string name_;
  std::map<std::string, double> params_;
  Eval eval_;
};

// f(u,v) = p e^{-mu0 tau} v e^{-a v} - d u.
inline Reaction nicholson(double p, double d, double a, double mu0 = 0.0, double tau = 0.0) {
  require(p > 0 && d > 0 && a > 0, "nicholson needs p, d, a > 0");
  require(mu0 >= 0 && tau >= 0, "nicholson needs mu0, tau >= 0");
  const double ps = p * std::exp(-mu0 * tau);
  if (!(ps > d)) fail(ErrorCode::NoPositiveEquilibrium, "p*exp(-mu0*tau) <= d, no positive equilibrium");
  return Reaction("nicholson", {{"p", p}, {"d", d}, {"a", a}, {"mu0", mu0}}, [ps, d, a](double u, double v) {
    const double e = std::exp(-a * v);
    ReactionValues r;
    r.f = ps * v * e - d * u;
    r.f1 = -d;
    r.f2 = ps * e * (1.0 - a * v);
    r.f22 = ps * a * e * (a * v - 2.0);
    return r;
  });
}

// f(u,v) = r v (1 - u/k): quasi-monotone on [0,k]^2 with an exact root at k.
inline Reaction delayed_logistic(double r, double k) {
  require(r > 0 && k > 0, "delayed_logistic needs r, k > 0");
  return Reaction("delayed_logistic", {{"r", r}, {"k", k}}, [r, k](double u, double v) {
    ReactionValues o;
    o.f = r * v * (1.0 - u / k);
    o.f1 = -r * v / k;
    o.f2 = r * (1.0 - u / k);
    o.f12 = -r / k;
    return o;
  });
}

// Smallest positive root of f(u,u) on (0, u_max], bracketed on a fine scan then bisected.
inline double carrying_capacity(const Reaction& f, double u_max = 10.0, int scan = 4000) {
  require(u_max > 0, "u_max must be positive");
  const double eps = 1e-6 * u_max / scan;
  if (!(f(eps, eps) > 0)) fail(ErrorCode::NoRoot, "f(u,u) is not positive near 0");
  double lo = eps, glo = f(lo, lo);
  for (int i = 1; i <= scan; ++i) {
    double hi = u_max * i / scan;
    const double ghi = f(hi, hi);
    if (ghi == 0.0) return hi;
    if ((glo > 0) != (ghi > 0)) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = f(mid, mid);
        if ((gm > 0) == (glo > 0)) lo = mid;
        else hi = mid;
      }
      // Polish with Newton on the bisected bracket.
      double k = 0.5 * (lo + hi);
      for (int it = 0; it < 3; ++it) {
        const auto r = f.all(k, k);
        const double g = r.f, dg = r.f1 + r.f2;
        if (dg == 0.0) break;
        const double next = k - g / dg;
        if (!(next > lo - 1e-12 && next < hi + 1e-12)) break;
        k = next;
      }
      return k;
    }
    lo = hi;
    glo = ghi;
  }
  fail(ErrorCode::NoRoot, "f(u,u) has no sign change on (0, u_max]");
}

}  // namespace nlwave

#endif
