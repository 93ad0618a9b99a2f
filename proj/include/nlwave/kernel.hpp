#ifndef NLWAVE_KERNEL_HPP
#define NLWAVE_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nlwave/error.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/parallel.hpp"

namespace nlwave {

struct Gaussian {
  double sigma = 1.0;
};
struct Laplace {
  double b = 1.0;
};
struct TopHat {
  double halfwidth = 1.0;
};
// Piecewise-linear density through (abscissae, values); zero outside the table.
struct Tabulated {
  std::vector<double> abscissae;
  std::vector<double> values;
};

using KernelFamily = std::variant<Gaussian, Laplace, TopHat, Tabulated>;

struct KernelSpec {
  KernelFamily family = Gaussian{};
  double radius = 8.0;
  double tolerance = 1e-10;

  static KernelSpec gaussian(double sigma, double radius = 0.0) {
    require(sigma > 0, "gaussian sigma must be positive");
    return {Gaussian{sigma}, radius > 0 ? radius : 8.0 * sigma, 1e-10};
  }
  static KernelSpec laplace(double b, double radius = 0.0) {
    require(b > 0, "laplace scale must be positive");
    return {Laplace{b}, radius > 0 ? radius : 25.0 * b, 1e-10};
  }
  static KernelSpec tophat(double halfwidth) {
    require(halfwidth > 0, "tophat halfwidth must be positive");
    return {TopHat{halfwidth}, halfwidth, 1e-10};
  }
  static KernelSpec tabulated(std::vector<double> x, std::vector<double> v);
  static KernelSpec tabulated_file(const std::string& path);

  std::string name() const {
    switch (family.index()) {
      case 0: return "gaussian";
      case 1: return "laplace";
      case 2: return "tophat";
      default: return "tabulated";
    }
  }
};

inline double density(const KernelSpec& k, double y) {
  if (const auto* g = std::get_if<Gaussian>(&k.family)) {
    const double z = y / g->sigma;
    return std::exp(-0.5 * z * z) / (g->sigma * std::sqrt(2.0 * M_PI));
  }
  if (const auto* l = std::get_if<Laplace>(&k.family)) return std::exp(-std::abs(y) / l->b) / (2.0 * l->b);
  if (const auto* t = std::get_if<TopHat>(&k.family)) return std::abs(y) <= t->halfwidth ? 0.5 / t->halfwidth : 0.0;
  const auto& tab = std::get<Tabulated>(k.family);
  const auto& x = tab.abscissae;
  if (y < x.front() || y > x.back()) return 0.0;
  auto it = std::upper_bound(x.begin(), x.end(), y);
  if (it == x.end()) return tab.values.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double s = (y - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - s) * tab.values[i - 1] + s * tab.values[i];
}

inline KernelSpec KernelSpec::tabulated(std::vector<double> x, std::vector<double> v) {
  require(x.size() == v.size() && x.size() >= 3, "tabulated kernel needs matching columns with at least 3 rows");
  for (std::size_t i = 1; i < x.size(); ++i) require(x[i] > x[i - 1], "tabulated abscissae must increase");
  for (double val : v)
    if (val < 0) fail(ErrorCode::NegativeKernel, "tabulated kernel has a negative value");
  KernelSpec k{Tabulated{x, v}, std::max(std::abs(x.front()), std::abs(x.back())), 1e-10};
  // Every table point must have its mirror within 1e-12.
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = x.size() - 1 - i;
    if (std::abs(x[i] + x[j]) > 1e-12 || std::abs(v[i] - v[j]) > 1e-12)
      fail(ErrorCode::SymmetryViolation, "tabulated kernel is not symmetric at y=" + std::to_string(x[i]));
  }
  return k;
}

inline KernelSpec KernelSpec::tabulated_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open kernel table " + path);
  std::vector<double> x, v;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a)) continue;
    if (!(ss >> b)) fail(ErrorCode::Io, "kernel table row needs two columns: " + line);
    x.push_back(a);
    v.push_back(b);
  }
  return tabulated(std::move(x), std::move(v));
}

namespace detail {

// int_{-R}^{0} J(y) e^{-beta y} dy, split at the density's kinks.
inline double left_integral(const KernelSpec& spec, double beta) {
  std::vector<double> cuts{-spec.radius};
  if (const auto* t = std::get_if<Tabulated>(&spec.family))
    for (double x : t->abscissae)
      if (x > -spec.radius && x < 0) cuts.push_back(x);
  if (const auto* t = std::get_if<TopHat>(&spec.family)) cuts.push_back(-t->halfwidth);
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += GK::integrate([&](double y) { return density(spec, y) * std::exp(-beta * y); }, cuts[i], cuts[i + 1], 15, 1e-15);
  return s;
}

}  // namespace detail

// Mass of the density truncated to [-R, R].
inline double mass(const KernelSpec& spec) { return 2.0 * detail::left_integral(spec, 0.0); }

// Integral over y <= 0 of e^{-beta y} J(y), normalized by the truncated mass so beta = 0 gives 1/2.
inline double half_line_moment(const KernelSpec& spec, double beta) {
  require(beta >= 0, "half_line_moment needs beta >= 0");
  return 0.5 * detail::left_integral(spec, beta) / detail::left_integral(spec, 0.0);
}

// Kernel sampled on y_k = k*h, |k| <= m, trapezoid weights renormalized to sum 1.
class DiscreteKernel {
 public:
  DiscreteKernel() = default;
  DiscreteKernel(const KernelSpec& spec, double h) : spec_(spec), h_(h) {
    require(h > 0, "kernel spacing must be positive");
    // R rounded up to a whole number of cells so samples land on grid nodes.
    m_ = static_cast<std::size_t>(std::ceil(spec.radius / h - 1e-9));
    require(m_ >= 1, "kernel radius shorter than one grid cell");
    w_.assign(2 * m_ + 1, 0.0);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double y = (static_cast<double>(i) - static_cast<double>(m_)) * h;
      w_[i] = h * density(spec, y);
    }
    w_.front() *= 0.5;
    w_.back() *= 0.5;
    // Symmetrize exactly; density is symmetric, this removes rounding asymmetry.
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = 0.5 * (w_[i] + w_[2 * m_ - i]);
      w_[i] = w_[2 * m_ - i] = a;
    }
    const double M = mass(spec);
    if (!(std::abs(M - 1.0) <= spec.tolerance))
      fail(ErrorCode::MassDeficit, "kernel mass " + std::to_string(M) + " differs from 1 by more than " +
                                       std::to_string(spec.tolerance));
    raw_mass_ = 0.0;
    for (double x : w_) raw_mass_ += x;
    for (double& x : w_) x /= raw_mass_;
  }

  const KernelSpec& spec() const { return spec_; }
  double spacing() const { return h_; }
  std::size_t half_width() const { return m_; }
  double radius() const { return static_cast<double>(m_) * h_; }
  double raw_mass() const { return raw_mass_; }
  // weights()[i] belongs to offset y = (i - m) h.
  const std::vector<double>& weights() const { return w_; }
  double offset(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(m_)) * h_; }

 private:
  KernelSpec spec_;
  double h_ = 1.0;
  std::size_t m_ = 0;
  double raw_mass_ = 1.0;
  std::vector<double> w_;
};


inline double exp_moment(const DiscreteKernel& k, double lambda) {
  require(lambda >= 0, "exp_moment needs lambda >= 0");
  const auto& w = k.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::exp(-lambda * k.offset(i));
  return s;
}

inline double half_line_moment(const DiscreteKernel& k, double beta) { return half_line_moment(k.spec(), beta); }

// Node samples of a profile; a drifting far field reads these once s + drift*t is back on the profile grid.
struct FarFieldTrack {
  double x0 = 0.0, h = 1.0;
  std::vector<double> values;
  double right = 0.0;
};

// Value outside the domain on the left: value * exp(rate*((s - anchor) + drift*t)).
// rate = 0 gives a constant clamp; drift = c follows a front in the lab frame.
struct FarField {
  double value = 0.0;
  double rate = 0.0;
  double anchor = 0.0;
  double drift = 0.0;
  std::shared_ptr<const FarFieldTrack> track;

  static FarField constant(double v) { return {v, 0.0, 0.0, 0.0, nullptr}; }
  double operator()(double s, double t = 0.0) const {
    const double z = s + drift * t;
    if (track && z >= track->x0) {
      const double pos = (z - track->x0) / track->h;
      const auto i = static_cast<std::size_t>(pos);
      if (i + 1 >= track->values.size()) return track->right;
      const double f = pos - static_cast<double>(i);
      return (1.0 - f) * track->values[i] + f * track->values[i + 1];
    }
    if (rate == 0.0) return value;
    return value * std::exp(rate * (z - anchor));
  }
};

struct Closure {
  FarField left;
  double right = 0.0;

  static Closure clamps(double l, double r) { return {FarField::constant(l), r}; }
};

// u extended by m values of the closure on each side.
inline std::vector<double> extend(const Field& u, const Grid& grid, const Closure& bc, std::size_t m, double t = 0.0) {
  std::vector<double> e(u.size() + 2 * m);
  const double h = grid.spacing();
  for (std::size_t i = 0; i < m; ++i) e[i] = bc.left(grid.x_min() - static_cast<double>(m - i) * h, t);
  std::copy(u.begin(), u.end(), e.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t i = 0; i < m; ++i) e[m + u.size() + i] = bc.right;
  return e;
}

// Direct stencil, fixed summation order per node.
inline Field convolve(const DiscreteKernel& k, const Field& u, const Grid& grid, const Closure& bc, double t = 0.0) {
  if (u.size() != grid.size()) fail(ErrorCode::InvalidArgument, "field length does not match grid");
  require(std::abs(k.spacing() - grid.spacing()) <= 1e-12 * grid.spacing(), "kernel spacing differs from grid spacing");
  const std::size_t m = k.half_width();
  const std::vector<double> e = extend(u, grid, bc, m, t);
  const auto& w = k.weights();
  const std::size_t n = u.size(), width = w.size();
  Field out(n);
  const double* wp = w.data();
  const double* ep = e.data();
#pragma omp parallel for schedule(static) if (n * width > 200000)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* row = ep + i;
    double s = 0.0;
    for (std::size_t q = 0; q < width; ++q) s += wp[q] * row[q];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

}  // namespace nlwave

#endif
