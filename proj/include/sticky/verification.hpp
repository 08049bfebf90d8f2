#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/flow_map.hpp"
#include "sticky/parallel.hpp"
#include "sticky/piecewise_linear.hpp"
#include "sticky/random.hpp"
#include "sticky/weak_solution.hpp"

namespace sticky {

/// Where the worst residual of a check was found.
struct Witness {
  std::uint64_t seed = 0;
  std::vector<std::size_t> indices;
  std::vector<double> times;
};

/// Outcome of one property check, possibly aggregated over many instances.
/// Residuals measure violation: an inequality lhs <= rhs reports lhs - rhs.
struct VerificationReport {
  std::string name;
  std::size_t instances = 0;
  double worst_residual = -std::numeric_limits<double>::infinity();
  Witness witness;
  double tolerance = 0.0;
  bool pass = true;

  VerificationReport() = default;
  VerificationReport(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  /// Records a residual; the first strictly larger one wins, so aggregation
  /// is deterministic given a fixed visiting order.
  void observe(double residual, std::vector<std::size_t> indices, std::vector<double> times) {
    if (residual > worst_residual || (std::isnan(residual) && !std::isnan(worst_residual))) {
      worst_residual = residual;
      witness.indices = std::move(indices);
      witness.times = std::move(times);
    }
  }

  void finish() { pass = !(worst_residual > tolerance) && !std::isnan(worst_residual); }

  /// Folds another instance's report into this one.
  void absorb(const VerificationReport& other) {
    if (instances == 0 && name.empty()) *this = VerificationReport(other.name, other.tolerance);
    if (other.worst_residual > worst_residual || (std::isnan(other.worst_residual) && !std::isnan(worst_residual))) {
      worst_residual = other.worst_residual;
      witness = other.witness;
    }
    instances += other.instances;
    finish();
  }
};

namespace detail {

inline VerificationReport single(std::string name, double tol, std::uint64_t seed) {
  VerificationReport r(std::move(name), tol);
  r.instances = 1;
  r.witness.seed = seed;
  return r;
}

// Index pairs (i < j) to examine: all of them for small N, else a seeded sample.
inline std::vector<std::pair<std::size_t, std::size_t>> check_pairs(std::size_t n, std::uint64_t seed,
                                                                    std::size_t all_pairs_limit = 200,
                                                                    std::size_t sampled = 10000) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n <= all_pairs_limit) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  while (pairs.size() < sampled) {
    std::size_t i = rng.integer(0, n - 1), j = rng.integer(0, n - 1);
    if (i == j) continue;
    pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  return pairs;
}

}  // namespace detail

/// `count` sorted sample times in (0, t_end]. With `avoid_events`, times
/// within the event tolerance of a collision are nudged off it.
[[nodiscard]] inline std::vector<double> sample_times(const TrajectorySet& traj, std::size_t count,
                                                     std::uint64_t seed, bool avoid_events = false) {
  std::vector<double> ts;
  const double t_end = traj.t_end();
  if (!(t_end > 0.0)) return ts;
  Rng rng(seed ^ 0x51afd7ed558ccd3ULL);
  for (std::size_t k = 0; k < count; ++k) {
    double t = t_end * (1.0 - rng.uniform());  // (0, t_end]
    if (avoid_events) {
      for (int tries = 0; tries < 8 && near_event(traj, t); ++tries) {
        const double step = 4.0 * kEventTimeEps * (1.0 + t);
        t = t + step <= t_end ? t + step : t - step;
      }
    }
    ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

// --- Individual checks --------------------------------------------------------

/// |x_i(t) - x_j(t)| / t <= |x_i(s) - x_j(s)| / s for 0 < s <= t.
[[nodiscard]] inline VerificationReport check_qspp(const TrajectorySet& traj, std::span<const double> times,
                                                   std::uint64_t seed = 0, double tol = 1e-10) {
  auto rep = detail::single("qspp", tol, seed);
  std::vector<double> ts;
  for (double t : times)
    if (t > 0.0) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  std::vector<std::vector<double>> pos;
  for (double t : ts) pos.push_back(traj.positions_at(t));
  for (auto [i, j] : detail::check_pairs(traj.size(), seed)) {
    double min_ratio = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double ratio = std::abs(pos[k][j] - pos[k][i]) / ts[k];
      if (k > 0) rep.observe(ratio - min_ratio, {i, j}, {ts[argmin], ts[k]});
      if (ratio < min_ratio) {
        min_ratio = ratio;
        argmin = k;
      }
    }
  }
  if (rep.worst_residual == -std::numeric_limits<double>::infinity()) rep.worst_residual = 0.0;
  rep.finish();
  return rep;
}

[[nodiscard]] inline VerificationReport check_qspp(const TrajectorySet& traj, std::size_t samples = 50,
                                                   std::uint64_t seed = 0, double tol = 1e-10) {
  return check_qspp(traj, sample_times(traj, samples, seed), seed, tol);
}

enum class GapBound {
  total_variation,  // x_i - x_j + t * sum of |v_{k+1} - v_k| over intermediate atoms
  two_point,        // x_i - x_j + t * |v_i - v_j|; only valid for ordered velocities
};

/// 0 <= x_i(t) - x_j(t) <= bound for x_i >= x_j.
[[nodiscard]] inline VerificationReport check_gap_bound(const TrajectorySet& traj, const PiecewiseLinearFn& v0,
                                                        std::span<const double> times,
                                                        GapBound bound = GapBound::total_variation,
                                                        std::uint64_t seed = 0, double tol = 1e-10) {
  const auto& init = traj.init();
  for (std::size_t i = 0; i < init.size(); ++i) {
    const double v = init.velocities()[i];
    if (std::abs(v0(init.positions()[i]) - v) > 1e-12 * (1.0 + std::abs(v)))
      throw InvalidInput("v0 does not interpolate the initial velocities");
  }
  auto rep = detail::single(bound == GapBound::total_variation ? "gap-bound" : "gap-bound-two-point", tol, seed);
  std::vector<double> tv(init.size(), 0.0);
  for (std::size_t k = 1; k < init.size(); ++k)
    tv[k] = tv[k - 1] + std::abs(init.velocities()[k] - init.velocities()[k - 1]);
  const auto pairs = detail::check_pairs(init.size(), seed);
  for (double t : times) {
    const auto pos = traj.positions_at(t);
    for (auto [j, i] : pairs) {
      const double gap = pos[i] - pos[j];
      const double spread = bound == GapBound::total_variation
                                ? tv[i] - tv[j]
                                : std::abs(init.velocities()[i] - init.velocities()[j]);
      const double rhs = init.positions()[i] - init.positions()[j] + t * spread;
      rep.observe(std::max(gap - rhs, -gap), {j, i}, {t});
    }
  }
  if (rep.worst_residual == -std::numeric_limits<double>::infinity()) rep.worst_residual = 0.0;
  rep.finish();
  return rep;
}

namespace detail {

// Ancestor chain of particle i: cluster ids from its singleton upward.
inline std::vector<std::size_t> ancestry(const TrajectorySet& traj, std::size_t i) {
  std::vector<std::size_t> chain;
  for (std::size_t c = i; c != kNoCluster; c = traj.clusters()[c].parent) chain.push_back(c);
  return chain;
}

}  // namespace detail

/// For adjacent particles the gap y = x_{i+1} - x_i has nonincreasing slope
/// until it closes, hence y(t) <= y(0) + t y'(0+).
[[nodiscard]] inline VerificationReport check_gap_concavity(const TrajectorySet& traj,
                                                            std::span<const double> times = {},
                                                            std::uint64_t seed = 0, double tol = 1e-10) {
  auto rep = detail::single("gap-concavity", tol, seed);
  const auto clusters = traj.clusters();
  const double t_end = traj.t_end();
  rep.worst_residual = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const auto left = detail::ancestry(traj, i);
    const auto right = detail::ancestry(traj, i + 1);
    double close = std::numeric_limits<double>::infinity();
    for (std::size_t c : left)
      if (clusters[c].hi >= i + 1) {
        close = clusters[c].born;
        break;
      }
    // Slope changes of either path strictly inside (0, close).
    std::vector<double> kinks;
    for (const auto* chain : {&left, &right})
      for (std::size_t c : *chain)
        if (clusters[c].born > 0.0 && clusters[c].born < close && clusters[c].born <= t_end)
          kinks.push_back(clusters[c].born);
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    auto gap_slope = [&](double t, Side side) {
      return traj.velocity_at(i + 1, t, side) - traj.velocity_at(i, t, side);
    };
    const double y0 = traj.init().positions()[i + 1] - traj.init().positions()[i];
    const double slope0 = traj.init().velocities()[i + 1] - traj.init().velocities()[i];
    for (double t : kinks) {
      rep.observe(gap_slope(t, Side::right) - gap_slope(t, Side::left), {i, i + 1}, {t});
      const double y = traj.position_at(i + 1, t) - traj.position_at(i, t);
      rep.observe(y - (y0 + t * slope0), {i, i + 1}, {t});
    }
    for (double t : times) {
      if (!(t < close)) continue;
      const double y = traj.position_at(i + 1, t) - traj.position_at(i, t);
      rep.observe(y - (y0 + t * slope0), {i, i + 1}, {t});
    }
  }
  rep.finish();
  return rep;
}

struct NamedFunction {
  std::string name;
  std::function<double(double)> fn;
};

[[nodiscard]] inline std::vector<NamedFunction> default_averaging_family() {
  return {{"1", [](double) { return 1.0; }},
          {"id", [](double x) { return x; }},
          {"x^2", [](double x) { return x * x; }},
          {"cos", [](double x) { return std::cos(x); }}};
}

/// sum m_i g(x_i(t)) x_i'(t+) = sum m_i g(x_i(t)) x_i'(s+) for 0 <= s <= t.
[[nodiscard]] inline VerificationReport check_averaging(const TrajectorySet& traj,
                                                        std::span<const NamedFunction> family,
                                                        std::span<const double> times, std::uint64_t seed = 0,
                                                        double tol = 1e-10) {
  auto rep = detail::single("averaging", tol, seed);
  rep.worst_residual = 0.0;
  std::vector<double> ts{0.0};
  for (double t : times)
    if (t > 0.0) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  std::vector<std::vector<double>> vel;
  for (double t : ts) vel.push_back(traj.velocities_at(t));
  const auto m = traj.init().masses();
  for (std::size_t g = 0; g < family.size(); ++g) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const auto pos = traj.positions_at(ts[k]);
      std::vector<double> w(pos.size());
      for (std::size_t i = 0; i < pos.size(); ++i) w[i] = m[i] * family[g].fn(pos[i]);
      auto pair = [&](std::size_t q) {
        detail::CompensatedSum s;
        for (std::size_t i = 0; i < pos.size(); ++i) s.add(w[i] * vel[q][i]);
        return s.value();
      };
      const double lhs = pair(k);
      for (std::size_t q = 0; q <= k; ++q) rep.observe(std::abs(lhs - pair(q)), {g}, {ts[q], ts[k]});
    }
  }
  rep.finish();
  return rep;
}

[[nodiscard]] inline VerificationReport check_oleinik(const TrajectorySet& traj, std::span<const double> times,
                                                      std::uint64_t seed = 0, double tol = 1e-10) {
  auto rep = detail::single("oleinik", tol, seed);
  rep.worst_residual = 0.0;
  const WeakSolutionView view(traj);
  for (double t : times)
    if (t > 0.0) rep.observe(view.oleinik_residual(t), {}, {t});
  rep.finish();
  return rep;
}

/// Kinetic energy never increases: residual is max over s <= t of E(t) - E(s).
[[nodiscard]] inline VerificationReport check_energy(const TrajectorySet& traj, std::span<const double> times,
                                                     std::uint64_t seed = 0, double tol = 1e-12) {
  auto rep = detail::single("energy", tol, seed);
  rep.worst_residual = 0.0;
  std::vector<double> ts{0.0};
  ts.insert(ts.end(), times.begin(), times.end());
  for (double t : traj.event_times()) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  double lowest = std::numeric_limits<double>::infinity(), at = 0.0;
  for (double t : ts) {
    const double e = traj.kinetic_energy(t);
    if (std::isfinite(lowest)) rep.observe(e - lowest, {}, {at, t});
    if (e < lowest) {
      lowest = e;
      at = t;
    }
  }
  rep.finish();
  return rep;
}

/// |P(t) - P(0)| / (1 + |P(0)|).
[[nodiscard]] inline VerificationReport check_momentum(const TrajectorySet& traj, std::span<const double> times,
                                                       std::uint64_t seed = 0, double tol = 1e-12) {
  auto rep = detail::single("momentum", tol, seed);
  rep.worst_residual = 0.0;
  const double p0 = traj.total_momentum(0.0);
  auto visit = [&](double t) { rep.observe(std::abs(traj.total_momentum(t) - p0) / (1.0 + std::abs(p0)), {}, {t}); };
  for (double t : times) visit(t);
  for (double t : traj.event_times()) visit(t);
  rep.finish();
  return rep;
}

/// Order preservation, stickiness and the N-1 event bound. Order residual is
/// (x_i - x_{i+1}) / (1 + |x_i|); once two particles coincide they must stay
/// together; extra events count as residual 1.
[[nodiscard]] inline VerificationReport check_order(const TrajectorySet& traj, std::span<const double> times,
                                                    std::uint64_t seed = 0, double tol = 1e-12) {
  auto rep = detail::single("order", tol, seed);
  rep.worst_residual = 0.0;
  if (traj.events().size() + 1 > traj.size()) rep.observe(1.0, {}, {});
  std::vector<double> ts(times.begin(), times.end());
  for (double t : traj.event_times()) ts.push_back(t);
  ts.push_back(0.0);
  std::sort(ts.begin(), ts.end());
  std::vector<char> stuck(traj.size(), 0);  // stuck[i]: particles i and i+1 have met
  for (double t : ts) {
    const auto pos = traj.positions_at(t);
    for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
      rep.observe((pos[i] - pos[i + 1]) / (1.0 + std::abs(pos[i])), {i, i + 1}, {t});
      if (stuck[i]) rep.observe(std::abs(pos[i + 1] - pos[i]), {i, i + 1}, {t});
      if (pos[i] == pos[i + 1]) stuck[i] = 1;
    }
  }
  rep.finish();
  return rep;
}

/// Flow-equation residual at non-event times.
[[nodiscard]] inline VerificationReport check_flow_equation(const TrajectorySet& traj, std::span<const double> times,
                                                            std::uint64_t seed = 0, double tol = 1e-12) {
  auto rep = detail::single("flow", tol, seed);
  rep.worst_residual = 0.0;
  const FlowMap map(traj);
  for (double t : times) {
    if (near_event(traj, t)) continue;
    rep.observe(flow_equation_residual(map, t), {}, {t});
  }
  rep.finish();
  return rep;
}

/// Weak-form residuals against `count` seeded bump test functions.
[[nodiscard]] inline VerificationReport check_weak_form(const TrajectorySet& traj, Balance which, std::size_t count,
                                                        std::size_t order, std::uint64_t seed = 0,
                                                        double tol = 1e-8) {
  auto rep = detail::single(which == Balance::mass ? "weak-mass" : "weak-momentum", tol, seed);
  rep.worst_residual = 0.0;
  if (!(traj.t_end() > 0.0)) {
    rep.finish();
    return rep;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Cluster& cl : traj.clusters()) {
    const double end = std::min(cl.died, traj.t_end());
    for (double x : {cl.origin, cl.position(end)}) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const double margin = 0.1 * std::max(hi - lo, 1.0);
  Rng rng(seed ^ 0x2545f4914f6cdd1dULL);
  const WeakSolutionView view(traj);
  for (std::size_t k = 0; k < count; ++k) {
    const auto phi = TestFunction::random(rng, lo - margin, hi + margin, traj.t_end());
    rep.observe(view.weak_form_residual(phi, which, order), {k}, {phi.t_begin(), phi.t_end()});
  }
  rep.finish();
  return rep;
}

// --- Brute-force time-stepping oracle -------------------------------------------

/// Positions of all particles on the grid t_k = k dt (plus t_end).
struct SampledPaths {
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // [time][particle]
};

/// Explicit fixed-step sticky dynamics, independent of the event-driven
/// solver. Each step moves every cluster in free flight and then restores the
/// order by pooling adjacent violators (x_a >= x_b) into their centre of mass
/// with momentum conserved. The oracle path is the linear interpolant of the
/// recorded states, so its error is concentrated just around collisions.
[[nodiscard]] inline SampledPaths oracle_simulate(const ParticleInit& init, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("oracle step must be positive");
  if (!(t_end >= 0.0)) throw InvalidInput("t_end must be nonnegative");
  struct Body {
    std::size_t lo, hi;
    double mass, momentum, x;
  };
  std::vector<Body> bodies;
  for (std::size_t i = 0; i < init.size(); ++i)
    bodies.push_back({i, i, init.masses()[i], init.masses()[i] * init.velocities()[i], init.positions()[i]});

  SampledPaths out;
  auto record = [&](double t) {
    std::vector<double> xs(init.size());
    for (const Body& body : bodies)
      for (std::size_t i = body.lo; i <= body.hi; ++i) xs[i] = body.x;
    out.times.push_back(t);
    out.positions.push_back(std::move(xs));
  };
  record(0.0);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? t_end : std::min(static_cast<double>(k) * dt, t_end);
    const double h = t_next - t;
    std::vector<Body> stack;
    for (Body body : bodies) {
      body.x += h * body.momentum / body.mass;
      stack.push_back(body);
      while (stack.size() >= 2 && stack[stack.size() - 2].x >= stack.back().x) {
        const Body right = stack.back();
        stack.pop_back();
        Body& left = stack.back();
        const double m = left.mass + right.mass;
        left.x = (left.mass * left.x + right.mass * right.x) / m;
        left.hi = right.hi;
        left.mass = m;
        left.momentum += right.momentum;
      }
    }
    bodies = std::move(stack);
    t = t_next;
    record(t);
  }
  return out;
}

/// Sup over time and particles of |exact - oracle|, the oracle taken as the
/// linear interpolant of its states. Both paths are piecewise linear, so the
/// sup is attained at oracle grid times or at exact collision times.
[[nodiscard]] inline VerificationReport compare_oracle(const ParticleInit& init, double t_end, double dt, double tol,
                                                       std::uint64_t seed = 0) {
  const auto exact = simulate(init, t_end);
  const auto paths = oracle_simulate(init, t_end, dt);
  auto rep = detail::single("oracle", tol, seed);
  rep.worst_residual = 0.0;
  for (std::size_t k = 0; k < paths.times.size(); ++k) {
    const auto xs = exact.positions_at(paths.times[k]);
    for (std::size_t i = 0; i < xs.size(); ++i)
      rep.observe(std::abs(xs[i] - paths.positions[k][i]), {i}, {paths.times[k]});
  }
  for (double te : exact.event_times()) {
    const auto it = std::upper_bound(paths.times.begin(), paths.times.end(), te);
    if (it == paths.times.begin() || it == paths.times.end()) continue;
    const auto k = static_cast<std::size_t>(it - paths.times.begin()) - 1;
    const double w = (te - paths.times[k]) / (paths.times[k + 1] - paths.times[k]);
    const auto xs = exact.positions_at(te);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double oracle = (1.0 - w) * paths.positions[k][i] + w * paths.positions[k + 1][i];
      rep.observe(std::abs(xs[i] - oracle), {i}, {te});
    }
  }
  rep.finish();
  return rep;
}

// --- Seeded instances and the suite runner ---------------------------------------

struct Instance {
  std::uint64_t seed = 0;
  ParticleInit init;
  double t_end = 2.0;
};

/// Masses U(0.5, 1.5) normalized, positions U(0, 1), velocities U(-1, 1).
/// n == 0 draws N uniformly from {2, ..., 500}.
[[nodiscard]] inline Instance random_instance(std::uint64_t seed, std::size_t n = 0, double t_end = 2.0) {
  Rng rng(seed);
  if (n == 0) n = rng.integer(2, 500);
  std::vector<double> m(n), x(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = rng.uniform(0.5, 1.5);
    x[i] = rng.uniform();
    v[i] = rng.uniform(-1.0, 1.0);
  }
  detail::CompensatedSum total;
  for (double mi : m) total.add(mi);
  for (double& mi : m) mi /= total.value();
  return {seed, ParticleInit(std::move(m), std::move(x), std::move(v)), t_end};
}

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"qspp",   "gap-bound", "gap-concavity", "averaging",
                                              "oleinik", "energy",    "momentum",      "order",
                                              "flow",    "weak-mass", "weak-momentum"};
  return names;
}

[[nodiscard]] inline double default_tolerance(const std::string& check) {
  if (check == "energy" || check == "momentum" || check == "order" || check == "flow") return 1e-12;
  if (check == "weak-mass" || check == "weak-momentum") return 1e-8;
  return 1e-10;
}

struct SuiteConfig {
  std::vector<std::string> checks = known_checks();
  std::uint64_t seed = 0;
  std::size_t n = 0;          // particles per random instance; 0 = random size
  std::size_t instances = 1;
  std::optional<double> tol;  // overrides every check's default
  double t_end = 2.0;
  std::size_t order = 12;
  std::size_t samples = 50;
  std::size_t flow_samples = 20;
  std::size_t weak_tests = 10;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// v0 interpolating the initial velocities, constant for a single particle.
[[nodiscard]] inline PiecewiseLinearFn interpolate_velocities(const ParticleInit& init) {
  if (init.size() == 1) {
    const double x = init.positions()[0];
    return PiecewiseLinearFn::constant(init.velocities()[0], x - 1.0, x + 1.0);
  }
  return PiecewiseLinearFn::interpolate({init.positions().begin(), init.positions().end()},
                                        {init.velocities().begin(), init.velocities().end()});
}

/// Runs the configured checks on one trajectory set, one report per check.
[[nodiscard]] inline std::vector<VerificationReport> run_checks(const TrajectorySet& traj, const SuiteConfig& cfg,
                                                                std::uint64_t seed,
                                                                const std::optional<PiecewiseLinearFn>& v0 = {}) {
  for (const auto& c : cfg.checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw InvalidInput("unknown check: " + c);
  const auto times = sample_times(traj, cfg.samples, seed);
  std::vector<VerificationReport> out;
  for (const auto& c : cfg.checks) {
    const double tol = cfg.tol.value_or(default_tolerance(c));
    VerificationReport r;
    if (c == "qspp") {
      r = check_qspp(traj, times, seed, tol);
    } else if (c == "gap-bound") {
      r = check_gap_bound(traj, v0 ? *v0 : interpolate_velocities(traj.init()), times, GapBound::total_variation,
                          seed, tol);
    } else if (c == "gap-concavity") {
      r = check_gap_concavity(traj, times, seed, tol);
    } else if (c == "averaging") {
      const auto family = default_averaging_family();
      r = check_averaging(traj, family, times, seed, tol);
    } else if (c == "oleinik") {
      r = check_oleinik(traj, times, seed, tol);
    } else if (c == "energy") {
      r = check_energy(traj, times, seed, tol);
    } else if (c == "momentum") {
      r = check_momentum(traj, times, seed, tol);
    } else if (c == "order") {
      r = check_order(traj, times, seed, tol);
    } else if (c == "flow") {
      r = check_flow_equation(traj, sample_times(traj, cfg.flow_samples, seed + 1, true), seed, tol);
    } else if (c == "weak-mass") {
      r = check_weak_form(traj, Balance::mass, cfg.weak_tests, cfg.order, seed, tol);
    } else {
      r = check_weak_form(traj, Balance::momentum, cfg.weak_tests, cfg.order, seed, tol);
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {

inline std::vector<VerificationReport> reduce(const std::vector<std::vector<VerificationReport>>& per_instance) {
  std::vector<VerificationReport> total;
  for (const auto& reports : per_instance) {
    if (total.empty()) {
      total = reports;
      continue;
    }
    for (std::size_t c = 0; c < reports.size(); ++c) total[c].absorb(reports[c]);
  }
  return total;
}

}  // namespace detail

/// Seeded random instances (seed, seed + 1, ...) checked in parallel; the
/// reduction visits instances in seed order, so output does not depend on
/// the thread count.
[[nodiscard]] inline std::vector<VerificationReport> run_suite(const SuiteConfig& cfg) {
  std::vector<std::vector<VerificationReport>> per(cfg.instances);
  detail::parallel_for(cfg.instances, cfg.threads, [&](std::size_t k) {
    const auto inst = random_instance(cfg.seed + k, cfg.n, cfg.t_end);
    per[k] = run_checks(simulate(inst.init, inst.t_end), cfg, inst.seed);
  });
  return detail::reduce(per);
}

}  // namespace sticky
