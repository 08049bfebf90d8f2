#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/flow_map.hpp"
#include "sticky/measures.hpp"
#include "sticky/parallel.hpp"
#include "sticky/piecewise_linear.hpp"
#include "sticky/weak_solution.hpp"

namespace sticky {

/// One discretization level: rho_0^k, its trajectories, and per sample time
/// the flow map on the common grid and the pushed-forward measure.
struct LevelResult {
  std::size_t n = 0;
  DiscreteMeasure initial;
  TrajectorySet trajectories;
  std::vector<std::vector<double>> grid_values;  // [time][grid point]
  std::vector<std::vector<double>> atom_values;  // [time][atom] = X^k(y_i, t)
  std::vector<DiscreteMeasure> measures;         // [time]
  double lipschitz_residual = 0.0;               // worst L2-in-time violation
  double bound_ratio = 0.0;                      // max |X| / ((1 + t)(1 + |y|))
};

/// Distances between consecutive levels at one sample time.
struct PairDistance {
  std::size_t coarse = 0, fine = 0;  // level indices
  double t = 0.0;
  double sup_diff = 0.0;  // D
  double w1 = 0.0;
  double joint = 0.0;
};

struct RefinementStudy {
  MeasureSpec spec;
  PiecewiseLinearFn v0;
  std::vector<std::size_t> levels;
  std::vector<double> times;
  std::vector<double> grid;
  std::vector<LevelResult> results;
  std::vector<PairDistance> pairs;  // level pair major, time minor
  double bound = 0.0;               // B in |X| <= B (1 + t)(1 + |y|)

  [[nodiscard]] const PairDistance& pair(std::size_t k, std::size_t time_index) const {
    return pairs[k * times.size() + time_index];
  }

  /// D and W1 strictly decrease across consecutive level pairs at every time.
  [[nodiscard]] bool monotone() const {
    for (std::size_t k = 1; k + 1 < levels.size(); ++k)
      for (std::size_t q = 0; q < times.size(); ++q) {
        if (!(pair(k, q).sup_diff < pair(k - 1, q).sup_diff) && pair(k - 1, q).sup_diff > 0.0) return false;
        if (!(pair(k, q).w1 < pair(k - 1, q).w1) && pair(k - 1, q).w1 > 0.0) return false;
      }
    return true;
  }

  /// Hard failure: D more than doubles at the finest pair.
  [[nodiscard]] bool diverging() const {
    if (levels.size() < 3) return false;
    const std::size_t last = levels.size() - 2;
    for (std::size_t q = 0; q < times.size(); ++q)
      if (pair(last, q).sup_diff > 2.0 * pair(last - 1, q).sup_diff) return true;
    return false;
  }

  /// Monotone over at least three pairs and the finest D under `threshold`
  /// (default: ten times the finest D itself).
  [[nodiscard]] bool converged(std::optional<double> threshold = std::nullopt) const {
    if (levels.size() < 4 || !monotone()) return false;
    for (std::size_t q = 0; q < times.size(); ++q) {
      const double d = pair(levels.size() - 2, q).sup_diff;
      if (d > threshold.value_or(10.0 * d)) return false;
    }
    return true;
  }
};

namespace detail {

inline double joint_moments_gap(const LevelResult& a, const LevelResult& b, std::size_t q,
                                std::pair<double, double> hull) {
  const double c = 0.5 * (hull.first + hull.second);
  const double r = std::max(0.5 * (hull.second - hull.first), 1e-3);
  // h(y, x): y the initial position, x = X(y, t).
  const std::vector<double (*)(double, double, double, double)> family{
      [](double y, double, double, double) { return y; },
      [](double, double x, double, double) { return x; },
      [](double y, double, double, double) { return y * y; },
      [](double, double x, double, double) { return x * x; },
      [](double y, double x, double, double) { return x * y; },
      [](double y, double, double c, double r) { return bump((y - c) / r); },
      [](double, double x, double c, double r) { return bump((x - c) / r); },
      [](double y, double x, double c, double r) { return bump((y - c) / r) * bump((x - c) / (2.0 * r)); },
      [](double y, double, double c, double r) { return bump((y - c + 0.5 * r) / (0.5 * r)); },
      [](double, double x, double c, double r) { return bump((x - c - 0.5 * r) / (0.5 * r)); },
  };
  auto integrate = [&](const LevelResult& lv, std::size_t h) {
    CompensatedSum s;
    for (std::size_t i = 0; i < lv.initial.size(); ++i)
      s.add(lv.initial[i].mass * family[h](lv.initial[i].x, lv.atom_values[q][i], c, r));
    return s.value();
  };
  double worst = 0.0;
  for (std::size_t h = 0; h < family.size(); ++h) worst = std::max(worst, std::abs(integrate(a, h) - integrate(b, h)));
  return worst;
}

inline void validate_grid(const MeasureSpec& spec, std::span<const double> grid) {
  if (grid.empty()) throw InvalidGrid("evaluation grid is empty");
  if (const auto* atoms = std::get_if<AtomsSpec>(&spec)) {
    for (double y : grid)
      if (atoms->measure.find(y) == atoms->measure.size())
        throw InvalidGrid("grid point is not an atom of the initial measure");
    return;
  }
  const auto [lo, hi] = support_hull(spec);
  for (double y : grid)
    if (!(y >= lo && y <= hi)) throw InvalidGrid("grid point outside the support of the initial measure");
}

}  // namespace detail

/// G interior quantiles (j + 1/2) / G of the spec.
[[nodiscard]] inline std::vector<double> quantile_grid(const MeasureSpec& spec, std::size_t count = 64) {
  std::vector<double> grid;
  for (std::size_t j = 0; j < count; ++j)
    grid.push_back(quantile(spec, (static_cast<double>(j) + 0.5) / static_cast<double>(count)));
  return grid;
}

/// Discretizes (spec, v0) at each level, simulates to the last sample time
/// and records the flow map, measures and pairwise distances.
[[nodiscard]] inline RefinementStudy refinement_study(const MeasureSpec& spec, const PiecewiseLinearFn& v0,
                                                      std::vector<std::size_t> levels, std::vector<double> times,
                                                      std::optional<std::vector<double>> grid = std::nullopt,
                                                      unsigned threads = 0) {
  validate(spec);
  if (levels.size() < 2) throw InvalidInput("refinement study needs at least two levels");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] == 0) throw InvalidInput("levels must be positive");
    if (k > 0 && levels[k] < levels[k - 1]) throw InvalidInput("levels must be nondecreasing");
  }
  if (times.empty()) throw InvalidInput("refinement study needs sample times");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("sample times must be finite and nonnegative");
  std::sort(times.begin(), times.end());

  RefinementStudy study{spec, v0, std::move(levels), std::move(times), {}, {}, {}, 0.0};
  study.grid = grid ? std::move(*grid) : quantile_grid(spec);
  detail::validate_grid(spec, study.grid);

  // B >= max(1, sup |v0| on the support hull) bounds |y| + t |V| at every level.
  const auto [lo, hi] = support_hull(spec);
  double vmax = std::max(std::abs(v0(lo)), std::abs(v0(hi)));
  for (const auto& k : v0.knots())
    if (k.x > lo && k.x < hi) vmax = std::max(vmax, std::abs(k.value));
  study.bound = std::max(1.0, vmax);

  const double t_end = study.times.back();
  study.results.resize(study.levels.size());
  detail::parallel_for(study.levels.size(), threads, [&](std::size_t k) {
    LevelResult& lv = study.results[k];
    lv.n = study.levels[k];
    lv.initial = discretize(spec, lv.n);
    const auto ys = lv.initial.positions();
    std::vector<double> vs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) vs[i] = v0(ys[i]);
    lv.trajectories = simulate(ParticleInit(lv.initial.masses(), ys, vs), t_end);
    const FlowMap map(lv.trajectories, v0);
    const WeakSolutionView view(lv.trajectories);

    double speed2 = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) speed2 += lv.initial[i].mass * vs[i] * vs[i];
    for (double t : study.times) {
      lv.grid_values.push_back(map.eval_many(study.grid, t));
      lv.atom_values.push_back(lv.trajectories.positions_at(t));
      lv.measures.push_back(view.measure_at(t));
      for (std::size_t i = 0; i < ys.size(); ++i)
        lv.bound_ratio =
            std::max(lv.bound_ratio, std::abs(lv.atom_values.back()[i]) / ((1.0 + t) * (1.0 + std::abs(ys[i]))));
    }
    for (std::size_t b = 0; b < study.times.size(); ++b)
      for (std::size_t a = 0; a < b; ++a) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
          const double d = lv.atom_values[b][i] - lv.atom_values[a][i];
          d2 += lv.initial[i].mass * d * d;
        }
        const double excess = std::sqrt(d2) - (study.times[b] - study.times[a]) * std::sqrt(speed2);
        lv.lipschitz_residual = std::max(lv.lipschitz_residual, excess);
      }
  });

  for (std::size_t k = 0; k + 1 < study.levels.size(); ++k) {
    const auto& a = study.results[k];
    const auto& b = study.results[k + 1];
    for (std::size_t q = 0; q < study.times.size(); ++q) {
      PairDistance d{k, k + 1, study.times[q], 0.0, 0.0, 0.0};
      for (std::size_t g = 0; g < study.grid.size(); ++g)
        d.sup_diff = std::max(d.sup_diff, std::abs(a.grid_values[q][g] - b.grid_values[q][g]));
      d.w1 = wasserstein1(a.measures[q], b.measures[q]);
      d.joint = detail::joint_moments_gap(a, b, q, {lo, hi});
      study.pairs.push_back(d);
    }
  }
  return study;
}

/// max over the test family h of |int h d sigma^k_t - int h d sigma^k'_t|,
/// sigma^k_t = (id, X^k(t))_# rho_0^k. `t` must be one of the study's times.
[[nodiscard]] inline double joint_distance(const RefinementStudy& study, std::size_t k, std::size_t k2, double t) {
  if (k >= study.results.size() || k2 >= study.results.size()) throw RangeError("invalid level index");
  const auto it = std::find(study.times.begin(), study.times.end(), t);
  if (it == study.times.end()) throw RangeError("time is not one of the study's sample times");
  const auto [lo, hi] = support_hull(study.spec);
  return detail::joint_moments_gap(study.results[k], study.results[k2],
                                   static_cast<std::size_t>(it - study.times.begin()), {lo, hi});
}

}  // namespace sticky
