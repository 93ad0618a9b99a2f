#ifndef NLWAVE_GRID_HPP
#define NLWAVE_GRID_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "nlwave/error.hpp"

namespace nlwave {

using Field = std::vector<double>;

// Uniform grid x_j = x_min + j*h, j = 0..n-1.
class Grid {
 public:
  Grid() = default;
  Grid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
    require(n >= 2, "grid needs at least two nodes");
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min, "grid bounds must satisfy x_min < x_max");
    h_ = (x_max - x_min) / static_cast<double>(n - 1);
  }

  // n chosen so the spacing is h; x_max is moved onto the last node.
  static Grid with_spacing(double x_min, double x_max, double h) {
    require(h > 0 && std::isfinite(h), "grid spacing must be positive");
    auto cells = static_cast<std::size_t>(std::llround((x_max - x_min) / h));
    require(cells >= 1, "grid spacing larger than the domain");
    Grid g;
    g.x_min_ = x_min;
    g.n_ = cells + 1;
    g.h_ = h;
    g.x_max_ = x_min + static_cast<double>(cells) * h;
    return g;
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double spacing() const { return h_; }
  std::size_t size() const { return n_; }
  double node(std::size_t j) const { return x_min_ + static_cast<double>(j) * h_; }

  // Same nodes relabelled by x -> x + offset.
  Grid shifted(double offset) const {
    Grid g = *this;
    g.x_min_ += offset;
    g.x_max_ += offset;
    return g;
  }

  std::vector<double> nodes() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
    return x;
  }

 private:
  double x_min_ = 0.0;
  double x_max_ = 1.0;
  std::size_t n_ = 2;
  double h_ = 1.0;
};

}  // namespace nlwave

#endif
