#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/measures.hpp"
#include "sticky/piecewise_linear.hpp"

namespace sticky {

using Partition = std::vector<std::vector<std::size_t>>;

/// Mass-weighted mean of `values` over each group, written back per atom.
[[nodiscard]] inline std::vector<double> conditional_expectation(const DiscreteMeasure& measure,
                                                                 std::span<const double> values,
                                                                 const Partition& groups) {
  const std::size_t n = measure.size();
  if (values.size() != n) throw InvalidInput("conditional expectation: one value per atom required");
  std::vector<char> seen(n, 0);
  std::vector<double> out(n);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidPartition("partition contains an empty group");
    detail::CompensatedSum m, mv;
    for (std::size_t i : g) {
      if (i >= n || seen[i]) throw InvalidPartition("partition groups must be disjoint atom indices");
      seen[i] = 1;
      m.add(measure[i].mass);
      mv.add(measure[i].mass * values[i]);
    }
    const double mean = mv.value() / m.value();
    for (std::size_t i : g) out[i] = mean;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidPartition("partition does not cover all atoms");
  return out;
}

/// omega(r): largest total variation of v0 over a window of width <= r inside
/// the knot span of v0.
[[nodiscard]] inline double continuity_modulus(const PiecewiseLinearFn& v0, double r) {
  if (!(r >= 0.0)) throw DomainError("continuity modulus needs r >= 0");
  const auto ks = v0.knots();
  std::vector<double> xs(ks.size()), cum(ks.size(), 0.0);
  for (std::size_t k = 0; k < ks.size(); ++k) {
    xs[k] = ks[k].x;
    if (k > 0) cum[k] = cum[k - 1] + std::abs(ks[k].value - ks[k - 1].value);
  }
  const double lo = xs.front(), hi = xs.back();
  if (r >= hi - lo) return cum.back();

  auto cum_at = [&](double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    if (k + 1 >= xs.size()) return cum.back();
    const double frac = (x - xs[k]) / (xs[k + 1] - xs[k]);
    return cum[k] + frac * (cum[k + 1] - cum[k]);
  };
  // The window integral is piecewise linear in its left end; its maximum sits
  // where either end touches a knot.
  double best = 0.0;
  for (double x : xs) {
    for (double a : {x, x - r}) {
      a = std::clamp(a, lo, hi - r);
      best = std::max(best, cum_at(a + r) - cum_at(a));
    }
  }
  return best;
}

/// Map sending time-s positions to time-t positions, extended to the line by
/// the inf-convolution with Lipschitz constant t/s.
class TransitionFn {
 public:
  TransitionFn(double s, double t, std::vector<double> from, std::vector<double> to)
      : s_(s), t_(t), from_(std::move(from)), to_(std::move(to)) {}

  [[nodiscard]] double s() const { return s_; }
  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] double lipschitz() const { return t_ / s_; }
  [[nodiscard]] std::span<const double> sources() const { return from_; }
  [[nodiscard]] std::span<const double> targets() const { return to_; }

  [[nodiscard]] double operator()(double x) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < from_.size(); ++k) {
      if (from_[k] == x) return to_[k];
      best = std::min(best, to_[k] + lipschitz() * std::abs(x - from_[k]));
    }
    return best;
  }

  /// Largest |f(x) - f(y)| / |x - y| over all pairs of distinct sample points.
  [[nodiscard]] double max_pair_ratio() const {
    double worst = 0.0;
    for (std::size_t a = 0; a < from_.size(); ++a)
      for (std::size_t b = a + 1; b < from_.size(); ++b)
        worst = std::max(worst, std::abs(to_[b] - to_[a]) / std::abs(from_[b] - from_[a]));
    return worst;
  }

 private:
  double s_, t_;
  std::vector<double> from_, to_;  // one entry per cluster present at s
};

/// Lagrangian flow map X(y, t) of a finite sticky particle system: exact on
/// the initial atoms, extended to the line by inf-convolution.
///
/// Holds a reference to the trajectory set, which must outlive the map.
class FlowMap {
 public:
  explicit FlowMap(const TrajectorySet& traj, std::optional<PiecewiseLinearFn> v0 = std::nullopt)
      : traj_(&traj), initial_(traj.init().measure()), v0_(std::move(v0)) {}

  [[nodiscard]] const TrajectorySet& trajectories() const { return *traj_; }
  [[nodiscard]] const DiscreteMeasure& initial_measure() const { return initial_; }
  [[nodiscard]] const std::optional<PiecewiseLinearFn>& initial_velocity() const { return v0_; }

  /// Extension constant: steepest adjacent-atom slope of X(t), capped by
  /// 1 + t max|v0'| when v0 is known.
  [[nodiscard]] double lipschitz_bound(double t) const {
    traj_->check_time(t);
    const auto xs = traj_->positions_at(t);
    const auto ys = traj_->init().positions();
    double cap = std::numeric_limits<double>::infinity();
    if (v0_) cap = 1.0 + t * v0_->max_abs_slope();
    if (xs.size() < 2) return std::isfinite(cap) ? cap : 1.0;
    double l = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) l = std::max(l, (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i]));
    return std::min(l, cap);
  }

  [[nodiscard]] double eval(double y, double t) const { return eval_many(std::span<const double>(&y, 1), t)[0]; }

  [[nodiscard]] std::vector<double> eval_many(std::span<const double> ys, double t) const {
    traj_->check_time(t);
    const auto xs = traj_->positions_at(t);
    const auto init = traj_->init().positions();
    const double l = lipschitz_bound(t);
    std::vector<double> out(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const double y = ys[k];
      const std::size_t idx = initial_.find(y);
      if (idx < initial_.size()) {
        out[k] = xs[idx];
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < xs.size(); ++i) best = std::min(best, xs[i] + l * std::abs(y - init[i]));
      out[k] = best;
    }
    return out;
  }

  [[nodiscard]] TransitionFn transition(double s, double t) const {
    if (!(s > 0.0)) throw DomainError("transition map needs s > 0");
    if (!(t >= s)) throw DomainError("transition map needs t >= s");
    traj_->check_time(t);
    std::vector<double> from, to;
    for (std::size_t c : traj_->clusters_at(s)) {
      const std::size_t i = traj_->clusters()[c].lo;
      from.push_back(traj_->position_at(i, s));
      to.push_back(traj_->position_at(i, t));
    }
    return TransitionFn(s, t, std::move(from), std::move(to));
  }

 private:
  const TrajectorySet* traj_;
  DiscreteMeasure initial_;
  std::optional<PiecewiseLinearFn> v0_;
};

/// True if t lies within the event-time tolerance of a collision.
[[nodiscard]] inline bool near_event(const TrajectorySet& traj, double t) {
  const auto ts = traj.event_times();
  auto it = std::lower_bound(ts.begin(), ts.end(), t - kEventTimeEps * (1.0 + std::abs(t)));
  return it != ts.end() && std::abs(*it - t) <= kEventTimeEps * (1.0 + std::abs(t));
}

/// max_i |X'(x_i, t) - E[v0 | X(t)](x_i)| at a non-event time t.
[[nodiscard]] inline double flow_equation_residual(const FlowMap& map, double t) {
  const auto& traj = map.trajectories();
  traj.check_time(t);
  if (near_event(traj, t)) throw AmbiguousTime("flow equation is not defined at a collision time");
  const auto velocities = traj.velocities_at(t);
  const auto expected =
      conditional_expectation(map.initial_measure(), traj.init().velocities(), traj.partition_at(t));
  double worst = 0.0;
  for (std::size_t i = 0; i < velocities.size(); ++i) worst = std::max(worst, std::abs(velocities[i] - expected[i]));
  return worst;
}

}  // namespace sticky
