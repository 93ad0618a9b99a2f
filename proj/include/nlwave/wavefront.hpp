#ifndef NLWAVE_WAVEFRONT_HPP
#define NLWAVE_WAVEFRONT_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "nlwave/kernel.hpp"
#include "nlwave/model.hpp"

namespace nlwave {

// exponential: exact exponential integration of a piecewise-linear source (second order).
// upwind: fixed point is a steady state of the moving-frame upwind method of lines.
enum class ProfileScheme { exponential, upwind };

inline const char* to_string(ProfileScheme s) { return s == ProfileScheme::upwind ? "upwind" : "exponential"; }

// Linear interpolation of a grid field at x; off-grid nodes take closure values.
inline double sample(const Field& u, const Grid& g, const Closure& bc, double x, double t = 0.0) {
  const double h = g.spacing();
  const double pos = (x - g.x_min()) / h;
  const double k0 = std::floor(pos);
  const double fr = pos - k0;
  auto at = [&](double k) {
    if (k < 0) return bc.left(g.x_min() + k * h, t);
    if (k > static_cast<double>(u.size() - 1)) return bc.right;
    return u[static_cast<std::size_t>(k)];
  };
  if (fr == 0.0) return at(k0);
  return (1.0 - fr) * at(k0) + fr * at(k0 + 1);
}

// v_j = u(x_j - shift) for every node, same interpolation weights at all nodes.
inline Field shifted(const Field& u, const Grid& g, const Closure& bc, double shift, double t = 0.0) {
  const double h = g.spacing();
  const double pos = -shift / h;
  const auto k0 = static_cast<long>(std::floor(pos));
  const double fr = pos - static_cast<double>(k0);
  const long n = static_cast<long>(u.size());
  auto at = [&](long k) {
    if (k < 0) return bc.left(g.x_min() + static_cast<double>(k) * h, t);
    if (k >= n) return bc.right;
    return u[static_cast<std::size_t>(k)];
  };
  Field out(u.size());
  for (long j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] = fr == 0.0 ? at(j + k0) : (1.0 - fr) * at(j + k0) + fr * at(j + k0 + 1);
  return out;
}

struct WaveProfile {
  Grid grid;
  Field phi1, phi2;
  double c = 0.0;
  double K = 0.0, K2 = 0.0;
  Closure closure1, closure2;
  ProfileScheme scheme = ProfileScheme::exponential;
  std::pair<double, double> residual{0.0, 0.0};
  int iterations = 0;
  double last_change = 0.0;
  double shift = 0.0;  // coordinate offset applied by normalization
  double tail_rate = 0.0;

  double value1(double x) const { return sample(phi1, grid, closure1, x); }
  double value2(double x) const { return sample(phi2, grid, closure2, x); }

  std::pair<double, double> boundary_gap() const {
    const double l = std::max(std::abs(phi1.front()), std::abs(phi2.front()));
    const double r = std::max(std::abs(phi1.back() - K), std::abs(phi2.back() - K2));
    return {l, r};
  }
  bool boundary_ok(double tol_bc) const {
    const auto [l, r] = boundary_gap();
    return l <= tol_bc && r <= tol_bc;
  }
  double min_increment() const {
    double m = INFINITY;
    for (std::size_t j = 1; j < phi1.size(); ++j) m = std::min({m, phi1[j] - phi1[j - 1], phi2[j] - phi2[j - 1]});
    return m;
  }
};

namespace detail {

// Exponential-integrator weights for c y' + rate y = F with F linear on each cell:
// y_j = E y_{j-1} + wp F_{j-1} + wj F_j.
struct ExpWeights {
  double E, wp, wj;
};

inline ExpWeights exp_weights(double rate, double h, double c) {
  const double x = rate * h / c;
  const double E = std::exp(-x), A = -std::expm1(-x);
  const double B = x > 1e-2 ? (1.0 - E - x * E) / x : x / 2 - x * x / 3 + x * x * x / 8 - x * x * x * x / 30;
  const double wj = (A - B) / rate;
  return {E, A / rate - wj, wj};
}

}  // namespace detail

// What the sweep for c y' + rate y = F makes of c d/dx on e^{lambda x}: exact for the discrete steady state.
inline double transport_symbol(ProfileScheme s, double c, double lambda, double h, double rate) {
  if (s == ProfileScheme::upwind) return c * (-std::expm1(-lambda * h)) / h;
  const auto [E, wp, wj] = detail::exp_weights(rate, h, c);
  const double q = std::exp(-lambda * h);
  return (1.0 - E * q) / (wp * q + wj) - rate;
}

// Linear interpolation of e^{lambda x} at x - c tau, relative to e^{lambda x}.
inline double delay_symbol(double lambda, double shift, double h) {
  const double pos = shift / h;
  const double s0 = std::floor(pos), fr = pos - s0;
  return (1.0 - fr) * std::exp(-lambda * s0 * h) + fr * std::exp(-lambda * (s0 + 1.0) * h);
}

inline double penalization(const ModelParams& p) { return p.D + p.gamma1 + 1.1 * p.sup_d1; }

// Characteristic function of the linearization at (0,0) for tails e^{lambda xi}.
inline double leading_edge_chi(const ModelParams& p, const DiscreteKernel& k, double c, ProfileScheme s, double lambda) {
  const double h = k.spacing();
  const auto r0 = p.reaction.all(0, 0);
  const double T1 = transport_symbol(s, c, lambda, h, penalization(p));
  const double T2 = transport_symbol(s, c, lambda, h, p.gamma2);
  return T1 - (p.D * (exp_moment(k, lambda) - 1.0) + r0.f1 + r0.f2 * delay_symbol(lambda, c * p.tau, h) - p.gamma1 +
               p.gamma1 * p.gamma2 / (p.gamma2 + T2));
}

// Smallest positive root of the characteristic function: the front's leading-edge rate.
inline double leading_edge_rate(const ModelParams& p, const DiscreteKernel& k, double c, ProfileScheme s,
                                double lambda_max = 10.0, int scan = 10000) {
  require(c > 0, "wave speed must be positive");
  auto chi = [&](double l) { return leading_edge_chi(p, k, c, s, l); };
  double lo = 1e-9, flo = chi(lo);
  if (!(flo < 0)) fail(ErrorCode::NoRoot, "zero state is not unstable, no leading-edge rate");
  for (int i = 1; i <= scan; ++i) {
    double hi = lambda_max * i / scan;
    double fhi = chi(hi);
    if (fhi >= 0) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi(mid) < 0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    lo = hi;
  }
  fail(ErrorCode::NoRoot, "no leading-edge rate below lambda_max: speed too slow for a monotone front");
}

struct SeedPair {
  Field upper1, upper2, lower1, lower2;
};

// Upper solution min(K, K e^{rate xi}) and its quiescent companion; lower = 0.
inline SeedPair seed_profiles(const ModelParams& p, double c, const Grid& grid, double rate, double r2) {
  require(c > 0, "wave speed must be positive");
  require(rate > 0, "seed rate must be positive (a flat seed is rejected)");
  SeedPair s;
  const std::size_t n = grid.size();
  s.upper1.resize(n);
  s.upper2.resize(n);
  s.lower1.assign(n, 0.0);
  s.lower2.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double e = p.K * std::exp(std::min(rate * grid.node(j), 700.0));
    s.upper1[j] = std::min(p.K, e);
    s.upper2[j] = std::min(p.K2(), r2 * e);
  }
  return s;
}

struct ProfileOptions {
  double tol = 1e-13;
  int max_iter = 5000;
  ProfileScheme scheme = ProfileScheme::exponential;
  std::optional<double> seed_rate;  // defaults to the leading-edge rate
  bool normalize = true;
};

namespace detail {

inline Field wave_source(const ModelParams& p, const DiscreteKernel& k, double c, double rho, const Grid& g,
                         const Field& phi1, const Field& phi2, const Closure& bc1) {
  const Field conv = convolve(k, phi1, g, bc1);
  const Field del = shifted(phi1, g, bc1, c * p.tau);
  Field F(phi1.size());
  for (std::size_t j = 0; j < F.size(); ++j)
    F[j] = p.D * conv[j] + p.reaction(phi1[j], del[j]) + (rho - p.D - p.gamma1) * phi1[j] + p.gamma2 * phi2[j];
  return F;
}

// Solves c y' + rate y = F from the left, starting at y(x_min - h) = prev, F(x_min - h) = Fprev.
inline Field sweep(ProfileScheme s, const Field& F, double rate, double h, double c, double prev, double Fprev) {
  Field out(F.size());
  if (s == ProfileScheme::upwind) {
    const double q = c / (c + rate * h), b = h / (c + rate * h);
    for (std::size_t j = 0; j < F.size(); ++j) out[j] = prev = q * prev + b * F[j];
    return out;
  }
  const auto [E, wp, wj] = exp_weights(rate, h, c);
  for (std::size_t j = 0; j < F.size(); ++j) {
    out[j] = prev = E * prev + wp * Fprev + wj * F[j];
    Fprev = F[j];
  }
  return out;
}

}  // namespace detail

// Monotone iteration from given seeds and closures; returns the unnormalized fixed point.
inline WaveProfile iterate_profile(const ModelParams& p, const DiscreteKernel& k, double c, const Grid& grid,
                                   const Closure& bc1, const Closure& bc2, Field phi1, Field phi2,
                                   ProfileScheme scheme, double tol, int max_iter) {
  require(c > 0, "wave speed must be positive");
  require(phi1.size() == grid.size() && phi2.size() == grid.size(), "seed length does not match grid");
  const double h = grid.spacing(), rho = penalization(p);
  const double xl = grid.x_min() - h;
  WaveProfile w;
  w.grid = grid;
  w.c = c;
  w.K = p.K;
  w.K2 = p.K2();
  w.closure1 = bc1;
  w.closure2 = bc2;
  w.scheme = scheme;
  w.tail_rate = bc1.left.rate;
  double change = INFINITY;
  int it = 0;
  while (it < max_iter) {
    const Field F = detail::wave_source(p, k, c, rho, grid, phi1, phi2, bc1);
    Field n1 = detail::sweep(scheme, F, rho, h, c, bc1.left(xl), F[0] * std::exp(-bc1.left.rate * h));
    Field S2(n1.size());
    for (std::size_t j = 0; j < n1.size(); ++j) S2[j] = p.gamma1 * n1[j];
    Field n2 = detail::sweep(scheme, S2, p.gamma2, h, c, bc2.left(xl), p.gamma1 * bc1.left(xl));
    change = 0.0;
    for (std::size_t j = 0; j < n1.size(); ++j) {
      const double up = std::max(n1[j] - phi1[j], n2[j] - phi2[j]);
      if (up > 1e-7)
        fail(ErrorCode::MonotonicityLoss, "iterate rose by " + std::to_string(up) + " at xi=" + std::to_string(grid.node(j)));
      if (std::min(n1[j], n2[j]) < -1e-9)
        fail(ErrorCode::MonotonicityLoss, "iterate fell below the lower seed at xi=" + std::to_string(grid.node(j)));
      if (!std::isfinite(n1[j]) || !std::isfinite(n2[j])) fail(ErrorCode::NonFinite, "profile iterate not finite");
      change = std::max({change, std::abs(n1[j] - phi1[j]), std::abs(n2[j] - phi2[j])});
    }
    phi1 = std::move(n1);
    phi2 = std::move(n2);
    ++it;
    if (change < tol) break;
  }
  w.phi1 = std::move(phi1);
  w.phi2 = std::move(phi2);
  w.iterations = it;
  w.last_change = change;
  if (!(change < tol))
    fail(ErrorCode::NoConvergence, "profile iteration stopped after " + std::to_string(it) +
                                       " sweeps with change " + std::to_string(change));
  return w;
}

// Relabels coordinates so that phi1 crosses K/2 at xi = 0.
inline void normalize(WaveProfile& w) {
  const double half = 0.5 * w.K;
  std::size_t j = 0;
  while (j < w.phi1.size() && w.phi1[j] < half) ++j;
  if (j == 0 || j == w.phi1.size()) fail(ErrorCode::NotAttained, "profile does not cross K/2 inside the domain");
  const double h = w.grid.spacing();
  const double xc = w.grid.node(j - 1) + h * (half - w.phi1[j - 1]) / (w.phi1[j] - w.phi1[j - 1]);
  w.grid = w.grid.shifted(-xc);
  w.closure1.left.anchor -= xc;
  w.closure2.left.anchor -= xc;
  w.shift += -xc;
}

inline std::pair<double, double> profile_residual(const ModelParams& p, const DiscreteKernel& k, const WaveProfile& w,
                                                  double trim = 0.1) {
  const std::size_t n = w.grid.size();
  const double h = w.grid.spacing();
  const Field conv = convolve(k, w.phi1, w.grid, w.closure1);
  const Field del = shifted(w.phi1, w.grid, w.closure1, w.c * p.tau);
  const std::size_t cut = static_cast<std::size_t>(trim * static_cast<double>(n));
  const std::size_t lo = std::max<std::size_t>(1, cut), hi = std::min(n - 1, n - cut);
  double r1 = 0, r2 = 0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double d1 = (w.phi1[j + 1] - w.phi1[j - 1]) / (2 * h);
    const double d2 = (w.phi2[j + 1] - w.phi2[j - 1]) / (2 * h);
    const double f1 = p.D * (conv[j] - w.phi1[j]) + p.reaction(w.phi1[j], del[j]) - p.gamma1 * w.phi1[j] +
                      p.gamma2 * w.phi2[j];
    const double f2 = p.gamma1 * w.phi1[j] - p.gamma2 * w.phi2[j];
    r1 = std::max(r1, std::abs(w.c * d1 - f1));
    r2 = std::max(r2, std::abs(w.c * d2 - f2));
  }
  return {r1, r2};
}

// Front at speed c: tail-closed monotone iteration, normalized and with residual recorded.
inline WaveProfile solve_profile(const ModelParams& p, const DiscreteKernel& k, double c, const Grid& grid,
                                 const ProfileOptions& o = {}) {
  require(c > 0, "wave speed must be positive");
  const double h = grid.spacing();
  const double lambda = leading_edge_rate(p, k, c, o.scheme);
  const double r2 = p.gamma1 / (p.gamma2 + transport_symbol(o.scheme, c, lambda, h, p.gamma2));
  const double rate = o.seed_rate.value_or(lambda);
  const SeedPair s = seed_profiles(p, c, grid, rate, r2);
  Closure bc1{FarField{0.5 * p.K, lambda, 0.0, 0.0, nullptr}, p.K};
  Closure bc2{FarField{0.5 * p.K * r2, lambda, 0.0, 0.0, nullptr}, p.K2()};
  WaveProfile w = iterate_profile(p, k, c, grid, bc1, bc2, s.upper1, s.upper2, o.scheme, o.tol, o.max_iter);
  if (o.normalize) normalize(w);
  w.residual = profile_residual(p, k, w);
  return w;
}

struct Xi0 {
  double xi0 = 0.0;
  std::size_t index = 0;
  bool gap = false;  // a node left of xi0 satisfies the condition again
};

// Smallest node xi0 such that d_i f(phi1, phi1(xi - c tau)) < (d_i f(K,K) + gamma2)/2, i = 1, 2,
// at xi0 and every node to its right.
inline Xi0 find_xi0(const ModelParams& p, const WaveProfile& w) {
  const auto rK = p.reaction.all(p.K, p.K);
  const double t1 = 0.5 * (rK.f1 + p.gamma2), t2 = 0.5 * (rK.f2 + p.gamma2);
  const double shift = w.c * p.tau;
  const Field del = shifted(w.phi1, w.grid, w.closure1, shift);
  const Field adv = shifted(w.phi1, w.grid, w.closure1, -shift);
  const std::size_t n = w.grid.size();
  auto ok = [&](std::size_t j) {
    const auto r = p.reaction.all(w.phi1[j], del[j]);
    return r.f1 < t1 && r.f2 < t2 && p.reaction.d2(adv[j], w.phi1[j]) < t2;
  };
  std::size_t j = n;
  while (j > 0 && ok(j - 1)) --j;
  if (j == n) fail(ErrorCode::NotAttained, "condition fails at xi_max; enlarge the domain");
  Xi0 r{w.grid.node(j), j, false};
  for (std::size_t i = 0; i + 1 < j; ++i)
    if (ok(i)) r.gap = true;
  return r;
}

}  // namespace nlwave

#endif
