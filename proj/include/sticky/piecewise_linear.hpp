#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sticky/error.hpp"

namespace sticky {

struct Knot {
  double x;
  double value;
};

/// Continuous piecewise-linear function given by knots with strictly
/// increasing abscissae. Outside the knot span the first/last segment slope
/// is continued.
class PiecewiseLinearFn {
 public:
  PiecewiseLinearFn() = default;

  explicit PiecewiseLinearFn(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw InvalidInput("piecewise-linear function needs at least 2 knots");
    for (std::size_t k = 0; k < knots_.size(); ++k) {
      if (!std::isfinite(knots_[k].x) || !std::isfinite(knots_[k].value))
        throw InvalidInput("piecewise-linear knot is not finite");
      if (k > 0 && !(knots_[k].x > knots_[k - 1].x))
        throw InvalidInput("piecewise-linear knots must be strictly increasing in x");
    }
  }

  /// Interpolant of (xs[k], ys[k]); xs must be strictly increasing.
  static PiecewiseLinearFn interpolate(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw InvalidInput("interpolation: size mismatch");
    std::vector<Knot> k(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) k[i] = {xs[i], ys[i]};
    return PiecewiseLinearFn(std::move(k));
  }

  static PiecewiseLinearFn constant(double c, double lo = 0.0, double hi = 1.0) {
    return PiecewiseLinearFn({{lo, c}, {hi, c}});
  }

  [[nodiscard]] std::span<const Knot> knots() const { return knots_; }
  [[nodiscard]] double front_x() const { return knots_.front().x; }
  [[nodiscard]] double back_x() const { return knots_.back().x; }

  [[nodiscard]] double operator()(double x) const {
    const std::size_t k = segment(x);
    const Knot& a = knots_[k];
    const Knot& b = knots_[k + 1];
    // Exact at both ends of the segment.
    if (x == b.x) return b.value;
    return a.value + segment_slope(k) * (x - a.x);
  }

  [[nodiscard]] double slope_right(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return segment_slope(std::min(k, knots_.size() - 2));
  }

  [[nodiscard]] double slope_left(double x) const {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                               [](const Knot& k, double v) { return k.x < v; });
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return segment_slope(std::min(k, knots_.size() - 2));
  }

  [[nodiscard]] double segment_slope(std::size_t k) const {
    return (knots_[k + 1].value - knots_[k].value) / (knots_[k + 1].x - knots_[k].x);
  }

  /// Largest |slope| over all segments (tails included, since they repeat end slopes).
  [[nodiscard]] double max_abs_slope() const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) s = std::max(s, std::abs(segment_slope(k)));
    return s;
  }

  /// Total variation on [a, b]: sum of |increments| over the restriction.
  [[nodiscard]] double total_variation(double a, double b) const {
    if (b < a) std::swap(a, b);
    double tv = 0.0;
    double prev_v = (*this)(a);
    for (const Knot& k : knots_) {
      if (k.x <= a) continue;
      if (k.x >= b) break;
      tv += std::abs(k.value - prev_v);
      prev_v = k.value;
    }
    tv += std::abs((*this)(b) - prev_v);
    return tv;
  }

 private:
  // Index k of the segment [x_k, x_{k+1}] used to evaluate at x.
  [[nodiscard]] std::size_t segment(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    if (it == knots_.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    return std::min(k, knots_.size() - 2);
  }

  std::vector<Knot> knots_;
};

}  // namespace sticky
