#ifndef NLWAVE_CERTIFICATE_HPP
#define NLWAVE_CERTIFICATE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "nlwave/kernel.hpp"
#include "nlwave/model.hpp"
#include "nlwave/wavefront.hpp"

namespace nlwave {

// w(xi) = e^{-beta (xi - xi0)} left of xi0, 1 from xi0 on.
struct WeightFunction {
  double beta = 0.0;
  double xi0 = 0.0;

  double log_value(double xi) const { return xi < xi0 ? -beta * (xi - xi0) : 0.0; }
  double operator()(double xi) const { return std::exp(log_value(xi)); }
  // w'/w, right-hand value at the kink.
  double log_derivative(double xi) const { return xi < xi0 ? -beta : 0.0; }
  double ratio(double a, double b) const { return std::exp(log_value(a) - log_value(b)); }
};

struct BetaChoice {
  double beta = 0.0;
  double beta_sup = 0.0;
  double g0 = 0.0;
  bool capped = false;
};

namespace detail {
inline double gap_rhs(const ModelParams& p) {
  const auto r = p.reaction.all(p.K, p.K);
  return p.D / 2 + p.gamma1 - r.f1 - r.f2 - 3.0 * p.gamma2;
}
}  // namespace detail

inline double beta_function(const ModelParams& p, const DiscreteKernel& k, double beta) {
  return p.D * half_line_moment(k, beta) - detail::gap_rhs(p);
}

inline BetaChoice find_beta(const ModelParams& p, const DiscreteKernel& k, double fraction = 0.5, double cap = 50.0) {
  require(fraction > 0 && fraction < 1, "beta fraction must lie in (0,1)");
  BetaChoice b;
  b.g0 = beta_function(p, k, 0.0);
  if (!(b.g0 < 0)) fail(ErrorCode::GapViolated, "g(0) = " + std::to_string(b.g0) + " >= 0");
  if (beta_function(p, k, cap) < 0) {
    b.beta_sup = cap;
    b.capped = true;
  } else {
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 300 && hi - lo > 4e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (beta_function(p, k, mid) < 0 ? lo : hi) = mid;
    }
    b.beta_sup = 0.5 * (lo + hi);
  }
  b.beta = fraction * b.beta_sup;
  return b;
}

struct SpeedThreshold {
  double c_star = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double c_threshold = 0.0;
};

inline SpeedThreshold speed_threshold(const ModelParams& p, const DiscreteKernel& k, double beta, double c_star = 0.0) {
  require(beta > 0, "beta must be positive");
  const auto r0 = p.reaction.all(0, 0);
  SpeedThreshold s;
  s.c_star = c_star;
  s.term2 = (p.gamma1 - p.gamma2) / beta;
  s.term3 = (2 * r0.f1 + 2 * r0.f2 + p.gamma2 - p.gamma1 - p.D / 2 + p.D * exp_moment(k, beta)) / beta;
  s.c_threshold = std::max({c_star, s.term2, s.term3});
  return s;
}

struct Constants {
  double C11 = 0, C12 = 0, C21 = 0, C22 = 0, C1 = 0, C2 = 0;

  // Name of the first nonpositive constant, empty when all are positive.
  std::string nonpositive() const {
    if (!(C11 > 0)) return "C11";
    if (!(C12 > 0)) return "C12";
    if (!(C21 > 0)) return "C21";
    if (!(C22 > 0)) return "C22";
    return {};
  }
};

inline Constants compute_constants(const ModelParams& p, const DiscreteKernel& k, double beta, double c) {
  const auto r0 = p.reaction.all(0, 0);
  const auto rK = p.reaction.all(p.K, p.K);
  Constants C;
  C.C11 = c * beta + p.D / 2 + p.gamma1 - 2 * r0.f1 - 2 * r0.f2 - p.gamma2 - p.D * exp_moment(k, beta);
  C.C12 = p.D / 2 + p.gamma1 - rK.f1 - rK.f2 - 3 * p.gamma2 - p.D * half_line_moment(k, beta);
  C.C21 = c * beta + p.gamma2 - p.gamma1;
  C.C22 = p.gamma2 - p.gamma1;
  C.C1 = std::min(C.C11, C.C12);
  C.C2 = std::min(C.C21, C.C22);
  return C;
}

inline Constants constants(const ModelParams& p, const DiscreteKernel& k, double beta, double c) {
  require(c > 0, "wave speed must be positive");
  Constants C = compute_constants(p, k, beta, c);
  if (auto bad = C.nonpositive(); !bad.empty()) fail(ErrorCode::NonPositiveConstant, bad);
  return C;
}

inline double mu1_equation(double C1, double tau, double d2f00, double mu) {
  return C1 - 2 * mu - std::expm1(2 * mu * tau) * d2f00;
}

inline double solve_mu1(double C1, double tau, double d2f00) {
  require(C1 > 0 && tau >= 0 && d2f00 >= 0, "solve_mu1 needs C1 > 0, tau >= 0, d2f00 >= 0");
  if (tau == 0.0 || d2f00 == 0.0) return C1 / 2;
  double lo = 0.0, hi = C1 / 2;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mu1_equation(C1, tau, d2f00, mid) > 0 ? lo : hi) = mid;
  }
  const double flo = mu1_equation(C1, tau, d2f00, lo), fhi = mu1_equation(C1, tau, d2f00, hi);
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

inline double mu2(double C2) {
  require(C2 > 0, "mu2 needs C2 > 0");
  return C2 / 2;
}

// Precomputed shifts for pointwise B/A evaluation along a profile.
class CertificateScan {
 public:
  CertificateScan(const ModelParams& p, const DiscreteKernel& k, const WaveProfile& w, const WeightFunction& wt)
      : p_(p), k_(k), w_(w), wt_(wt) {
    del_ = shifted(w.phi1, w.grid, w.closure1, w.c * p.tau);
    adv_ = shifted(w.phi1, w.grid, w.closure1, -w.c * p.tau);
  }

  struct Point {
    double B1 = 0, B2 = 0;
    double delay_term = 0;  // [w(xi+c tau)/w(xi)] d2f(phi1(xi+c tau), phi1(xi))
  };

  Point at(std::size_t j, double log_derivative) const {
    const double xi = w_.grid.node(j);
    const auto r = p_.reaction.all(w_.phi1[j], del_[j]);
    Point o;
    o.delay_term = wt_.ratio(xi + w_.c * p_.tau, xi) * p_.reaction.d2(adv_[j], w_.phi1[j]);
    const auto& om = k_.weights();
    const double lw = wt_.log_value(xi);
    double I = 0.0;
    for (std::size_t q = 0; q < om.size(); ++q) I += om[q] * std::exp(wt_.log_value(xi + k_.offset(q)) - lw);
    o.B1 = -w_.c * log_derivative + p_.D + p_.gamma1 - 2 * r.f1 - r.f2 - p_.gamma2 - o.delay_term - p_.D * I;
    o.B2 = -w_.c * log_derivative + p_.gamma2 - p_.gamma1;
    return o;
  }
  Point at(std::size_t j) const { return at(j, wt_.log_derivative(w_.grid.node(j))); }

  const Grid& grid() const { return w_.grid; }

 private:
  const ModelParams& p_;
  const DiscreteKernel& k_;
  const WaveProfile& w_;
  WeightFunction wt_;
  Field del_, adv_;
};

inline std::pair<double, double> eval_B(const ModelParams& p, const WaveProfile& w, const WeightFunction& wt,
                                        const DiscreteKernel& k, std::size_t j) {
  const auto o = CertificateScan(p, k, w, wt).at(j);
  return {o.B1, o.B2};
}

inline std::pair<double, double> eval_A(const ModelParams& p, const WaveProfile& w, const WeightFunction& wt,
                                        const DiscreteKernel& k, double mu, std::size_t j) {
  const auto o = CertificateScan(p, k, w, wt).at(j);
  return {o.B1 - 2 * mu - o.delay_term * std::expm1(2 * mu * p.tau), o.B2 - 2 * mu};
}

struct Extremum {
  double value = INFINITY;
  double xi = 0.0;
};

struct MuScanEntry {
  double mu = 0, C3 = 0, C4 = 0, min_A1 = 0, min_A2 = 0;
};

struct StabilityCertificate {
  double beta = 0, beta_sup = 0;
  double xi0 = 0;
  bool xi0_gap = false;
  double c = 0;
  SpeedThreshold threshold;
  Constants C;
  double C3 = 0, C4 = 0;
  double mu1 = 0, mu2 = 0, mu_max = 0, mu = 0;
  double mu_fraction = 0.9;
  Extremum min_B1, min_B2, min_A1, min_A2;
  // B at the kink with w'/w from the left (-beta) and from the right (0).
  double kink_B1_left = 0, kink_B1_right = 0, kink_B2_left = 0, kink_B2_right = 0;
  std::vector<MuScanEntry> mu_scan;
  bool valid = false;
  std::vector<std::string> failures;
};

struct CertifyOptions {
  double c_star = 0.0;
  double mu_fraction = 0.9;
  double beta_fraction = 0.5;
  std::optional<double> beta_override;
  int mu_scan_points = 10;
};

inline double C3_of(const Constants& C, double mu, double tau, double d2f00) {
  return C.C1 - 2 * mu - std::expm1(2 * mu * tau) * d2f00;
}

inline StabilityCertificate certify(const ModelParams& p, const DiscreteKernel& k, const WaveProfile& w,
                                    const CertifyOptions& o = {}) {
  require(o.mu_fraction > 0 && o.mu_fraction < 1, "mu fraction must lie in (0,1)");
  StabilityCertificate s;
  s.c = w.c;
  s.mu_fraction = o.mu_fraction;
  const BetaChoice b = find_beta(p, k, o.beta_fraction);
  s.beta_sup = b.beta_sup;
  s.beta = o.beta_override.value_or(b.beta);
  require(s.beta > 0, "beta must be positive");
  const Xi0 x0 = find_xi0(p, w);
  s.xi0 = x0.xi0;
  s.xi0_gap = x0.gap;
  s.threshold = speed_threshold(p, k, s.beta, o.c_star);
  s.C = compute_constants(p, k, s.beta, w.c);
  const double d2f00 = p.reaction.d2(0, 0);
  const WeightFunction wt{s.beta, s.xi0};
  const CertificateScan scan(p, k, w, wt);

  const std::size_t n = w.grid.size();
  std::vector<CertificateScan::Point> pts(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) pts[static_cast<std::size_t>(j)] = scan.at(static_cast<std::size_t>(j));
  for (std::size_t j = 0; j < n; ++j) {
    if (pts[j].B1 < s.min_B1.value) s.min_B1 = {pts[j].B1, w.grid.node(j)};
    if (pts[j].B2 < s.min_B2.value) s.min_B2 = {pts[j].B2, w.grid.node(j)};
  }
  const auto kl = scan.at(x0.index, -s.beta), kr = scan.at(x0.index, 0.0);
  s.kink_B1_left = kl.B1;
  s.kink_B1_right = kr.B1;
  s.kink_B2_left = kl.B2;
  s.kink_B2_right = kr.B2;

  if (!(w.c > s.threshold.c_threshold)) s.failures.push_back("speed not above threshold");
  if (auto bad = s.C.nonpositive(); !bad.empty()) {
    s.failures.push_back("NonPositiveConstant(" + bad + ")");
    s.valid = false;
    return s;
  }
  s.mu1 = solve_mu1(s.C.C1, p.tau, d2f00);
  s.mu2 = mu2(s.C.C2);
  s.mu_max = std::min(s.mu1, s.mu2);
  s.mu = o.mu_fraction * s.mu_max;
  s.C3 = C3_of(s.C, s.mu, p.tau, d2f00);
  s.C4 = s.C.C2 - 2 * s.mu;

  auto A_minima = [&](double mu) {
    Extremum a1, a2;
    const double e = std::expm1(2 * mu * p.tau);
    for (std::size_t j = 0; j < n; ++j) {
      const double A1 = pts[j].B1 - 2 * mu - pts[j].delay_term * e, A2 = pts[j].B2 - 2 * mu;
      if (A1 < a1.value) a1 = {A1, w.grid.node(j)};
      if (A2 < a2.value) a2 = {A2, w.grid.node(j)};
    }
    return std::make_pair(a1, a2);
  };
  std::tie(s.min_A1, s.min_A2) = A_minima(s.mu);
  for (int i = 1; i <= o.mu_scan_points; ++i) {
    const double mu = s.mu_max * i / (o.mu_scan_points + 1);
    const auto [a1, a2] = A_minima(mu);
    s.mu_scan.push_back({mu, C3_of(s.C, mu, p.tau, d2f00), s.C.C2 - 2 * mu, a1.value, a2.value});
  }

  constexpr double slack = 1e-9;
  if (!(s.C3 > 0)) s.failures.push_back("NonPositiveConstant(C3)");
  if (!(s.C4 > 0)) s.failures.push_back("NonPositiveConstant(C4)");
  if (s.min_B1.value < s.C.C1 - slack) s.failures.push_back("min B1 below C1");
  if (s.min_B2.value < s.C.C2 - slack) s.failures.push_back("min B2 below C2");
  if (s.min_A1.value < s.C3 - slack) s.failures.push_back("min A1 below C3");
  if (s.min_A2.value < s.C4 - slack) s.failures.push_back("min A2 below C4");
  for (const auto& e : s.mu_scan)
    if (e.min_A1 < e.C3 - slack || e.min_A2 < e.C4 - slack) {
      s.failures.push_back("mu scan: A below bound at mu=" + std::to_string(e.mu));
      break;
    }
  s.valid = s.failures.empty();
  return s;
}

}  // namespace nlwave

#endif
