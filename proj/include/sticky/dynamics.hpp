#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sticky/error.hpp"
#include "sticky/measures.hpp"
#include "sticky/piecewise_linear.hpp"

namespace sticky {

/// Relative tolerances for treating two collisions as one k-way event.
inline constexpr double kEventTimeEps = 1e-12;
inline constexpr double kEventPosEps = 1e-12;

inline constexpr std::size_t kNoCluster = std::numeric_limits<std::size_t>::max();

enum class Side { left, right };

/// Initial particle data, held sorted by position. Particle index i always
/// refers to this sorted order.
class ParticleInit {
 public:
  ParticleInit() = default;

  ParticleInit(std::vector<double> masses, std::vector<double> positions, std::vector<double> velocities) {
    const std::size_t n = masses.size();
    if (n == 0) throw InvalidInput("particle data is empty");
    if (positions.size() != n || velocities.size() != n)
      throw InvalidInput("masses, positions and velocities must have equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(masses[i]) || !std::isfinite(positions[i]) || !std::isfinite(velocities[i]))
        throw InvalidInput("particle data contains NaN or infinity");
      if (!(masses[i] > 0.0)) throw InvalidInput("particle masses must be positive");
      total += masses[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("particle masses must sum to 1");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
    masses_.resize(n);
    positions_.resize(n);
    velocities_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      masses_[k] = masses[order[k]] / total;
      positions_[k] = positions[order[k]];
      velocities_[k] = velocities[order[k]];
      if (k > 0 && detail::coincident(positions_[k], positions_[k - 1]))
        throw InvalidInput("duplicate initial positions");
    }
  }

  [[nodiscard]] std::size_t size() const { return masses_.size(); }
  [[nodiscard]] std::span<const double> masses() const { return masses_; }
  [[nodiscard]] std::span<const double> positions() const { return positions_; }
  [[nodiscard]] std::span<const double> velocities() const { return velocities_; }

  [[nodiscard]] DiscreteMeasure measure() const {
    std::vector<Atom> atoms(size());
    for (std::size_t i = 0; i < size(); ++i) atoms[i] = {positions_[i], masses_[i]};
    return DiscreteMeasure::normalized(std::move(atoms));
  }

 private:
  std::vector<double> masses_, positions_, velocities_;
};

/// A maximal group of particles sharing one straight path on [born, died).
/// Members are the contiguous index range [lo, hi].
struct Cluster {
  std::size_t lo = 0, hi = 0;
  double mass = 0.0;
  double velocity = 0.0;
  double born = 0.0;
  double died = std::numeric_limits<double>::infinity();
  double origin = 0.0;  // position at `born`
  std::size_t parent = kNoCluster;

  [[nodiscard]] double position(double t) const { return origin + velocity * (t - born); }
  [[nodiscard]] bool alive_right(double t) const { return born <= t && t < died; }
  [[nodiscard]] bool alive_left(double t) const { return born < t && t <= died; }
  [[nodiscard]] std::size_t count() const { return hi - lo + 1; }
};

struct CollisionEvent {
  double time = 0.0;
  double position = 0.0;
  std::vector<std::size_t> merged;  // cluster ids, left to right
  std::size_t result = kNoCluster;
};

/// Exact sticky trajectories on [0, t_end]. Cluster ids 0..N-1 are the
/// initial singletons; each event appends one cluster.
class TrajectorySet {
 public:
  TrajectorySet() = default;

  /// Rebuilds a trajectory set from its cluster genealogy (e.g. after import).
  TrajectorySet(ParticleInit init, double t_end, std::vector<Cluster> clusters, std::vector<CollisionEvent> events)
      : init_(std::move(init)), t_end_(t_end), clusters_(std::move(clusters)), events_(std::move(events)) {
    if (clusters_.size() < init_.size()) throw InvalidInput("trajectory set: missing initial clusters");
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      const Cluster& cl = clusters_[c];
      if (cl.lo > cl.hi || cl.hi >= init_.size()) throw InvalidInput("trajectory set: bad member range");
      if (cl.parent != kNoCluster && (cl.parent >= clusters_.size() || cl.parent <= c))
        throw InvalidInput("trajectory set: bad parent link");
    }
  }

  [[nodiscard]] const ParticleInit& init() const { return init_; }
  [[nodiscard]] std::size_t size() const { return init_.size(); }
  [[nodiscard]] double t_end() const { return t_end_; }
  [[nodiscard]] std::span<const Cluster> clusters() const { return clusters_; }
  [[nodiscard]] std::span<const CollisionEvent> events() const { return events_; }

  [[nodiscard]] std::vector<double> event_times() const {
    std::vector<double> ts;
    ts.reserve(events_.size());
    for (const auto& e : events_) ts.push_back(e.time);
    return ts;
  }

  /// Cluster containing particle i at time t; Side::right gives the cluster
  /// whose velocity is the right slope at t.
  [[nodiscard]] std::size_t cluster_of(std::size_t i, double t, Side side = Side::right) const {
    check_index(i);
    check_time(t, side);
    std::size_t c = i;
    if (side == Side::right) {
      while (!(t < clusters_[c].died) && clusters_[c].parent != kNoCluster) c = clusters_[c].parent;
    } else {
      while (clusters_[c].died < t && clusters_[c].parent != kNoCluster) c = clusters_[c].parent;
    }
    return c;
  }

  [[nodiscard]] double position_at(std::size_t i, double t) const {
    return clusters_[cluster_of(i, t, Side::right)].position(t);
  }

  [[nodiscard]] double velocity_at(std::size_t i, double t, Side side) const {
    return clusters_[cluster_of(i, t, side)].velocity;
  }

  /// Ids of the clusters present at t (right-continuous), ordered by position.
  [[nodiscard]] std::vector<std::size_t> clusters_at(double t) const {
    check_time(t, Side::right);
    std::vector<std::size_t> by_lo(size(), kNoCluster);
    for (std::size_t c = 0; c < clusters_.size(); ++c)
      if (clusters_[c].alive_right(t))
        by_lo[clusters_[c].lo] = c;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size();) {
      const std::size_t c = by_lo[i];
      out.push_back(c);
      i = clusters_[c].hi + 1;
    }
    return out;
  }

  /// Positions of every particle at time t.
  [[nodiscard]] std::vector<double> positions_at(double t) const {
    std::vector<double> xs(size());
    for (std::size_t c : clusters_at(t)) {
      const double x = clusters_[c].position(t);
      for (std::size_t i = clusters_[c].lo; i <= clusters_[c].hi; ++i) xs[i] = x;
    }
    return xs;
  }

  /// Right slopes of every particle at time t.
  [[nodiscard]] std::vector<double> velocities_at(double t) const {
    std::vector<double> vs(size());
    for (std::size_t c : clusters_at(t))
      for (std::size_t i = clusters_[c].lo; i <= clusters_[c].hi; ++i) vs[i] = clusters_[c].velocity;
    return vs;
  }

  /// Member index groups of the clusters present at t.
  [[nodiscard]] std::vector<std::vector<std::size_t>> partition_at(double t) const {
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t c : clusters_at(t)) {
      auto& g = groups.emplace_back();
      for (std::size_t i = clusters_[c].lo; i <= clusters_[c].hi; ++i) g.push_back(i);
    }
    return groups;
  }

  [[nodiscard]] double total_momentum(double t) const {
    detail::CompensatedSum p;
    for (std::size_t c : clusters_at(t)) p.add(clusters_[c].mass * clusters_[c].velocity);
    return p.value();
  }

  [[nodiscard]] double kinetic_energy(double t) const {
    detail::CompensatedSum e;
    for (std::size_t c : clusters_at(t)) e.add(0.5 * clusters_[c].mass * clusters_[c].velocity * clusters_[c].velocity);
    return e.value();
  }

  /// (t, x) breakpoints of particle i's path, from (0, x_i) to (t_end, x(t_end)).
  [[nodiscard]] std::vector<Knot> breakpoints(std::size_t i) const {
    check_index(i);
    std::vector<Knot> ks;
    for (std::size_t c = i; c != kNoCluster; c = clusters_[c].parent) {
      const Cluster& cl = clusters_[c];
      if (cl.born > t_end_) break;
      if (ks.empty() || cl.born > ks.back().x) ks.push_back({cl.born, cl.origin});
      if (!(cl.died <= t_end_)) break;
    }
    const double x_end = position_at(i, t_end_);
    if (t_end_ > ks.back().x) ks.push_back({t_end_, x_end});
    return ks;
  }

  /// The path of particle i as a piecewise-linear function of time. For
  /// t_end = 0 the free-flight continuation is used as the second knot.
  [[nodiscard]] PiecewiseLinearFn trajectory(std::size_t i) const {
    auto ks = breakpoints(i);
    if (ks.size() < 2) ks.push_back({ks.front().x + 1.0, ks.front().value + velocity_at(i, ks.front().x, Side::right)});
    return PiecewiseLinearFn(std::move(ks));
  }

  void check_time(double t, Side side = Side::right) const {
    if (!(t >= 0.0 && t <= t_end_)) throw RangeError("time outside [0, t_end]");
    if (side == Side::left && !(t > 0.0)) throw RangeError("left limit requires t > 0");
  }

 private:
  friend TrajectorySet simulate(const ParticleInit& init, double t_end);

  void check_index(std::size_t i) const {
    if (i >= size()) throw RangeError("particle index out of range");
  }

  ParticleInit init_;
  double t_end_ = 0.0;
  std::vector<Cluster> clusters_;
  std::vector<CollisionEvent> events_;
};

namespace detail {

struct PendingCollision {
  double time;
  double position;
  std::size_t left, right;

  // Min-heap order: earliest time, then leftmost position.
  friend bool operator>(const PendingCollision& a, const PendingCollision& b) {
    if (a.time != b.time) return a.time > b.time;
    if (a.position != b.position) return a.position > b.position;
    return a.left > b.left;
  }
};

inline bool same_time(double a, double b) {
  return std::abs(a - b) <= kEventTimeEps * (1.0 + std::max(std::abs(a), std::abs(b)));
}
inline bool same_place(double a, double b) {
  return std::abs(a - b) <= kEventPosEps * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/// Event-driven sticky particle dynamics on [0, t_end].
///
/// Only adjacent clusters can meet first, so candidate collisions between
/// neighbours live in a min-heap. Entries referring to clusters that have
/// since merged are discarded when popped (cluster ids are never reused).
/// All clusters meeting at one point at one time merge in a single event with
/// velocity = total momentum / total mass.
[[nodiscard]] inline TrajectorySet simulate(const ParticleInit& init, double t_end) {
  if (!std::isfinite(t_end) || t_end < 0.0) throw InvalidInput("t_end must be finite and nonnegative");
  if (init.size() == 0) throw InvalidInput("particle data is empty");

  TrajectorySet out;
  out.init_ = init;
  out.t_end_ = t_end;
  const std::size_t n = init.size();
  auto& cl = out.clusters_;
  cl.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Cluster c;
    c.lo = c.hi = i;
    c.mass = init.masses()[i];
    c.velocity = init.velocities()[i];
    c.origin = init.positions()[i];
    cl.push_back(c);
  }

  std::vector<std::size_t> prev(2 * n, kNoCluster), next(2 * n, kNoCluster);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    next[i] = i + 1;
    prev[i + 1] = i;
  }

  std::priority_queue<detail::PendingCollision, std::vector<detail::PendingCollision>, std::greater<>> queue;
  double now = 0.0;

  auto schedule = [&](std::size_t a, std::size_t b) {
    if (a == kNoCluster || b == kNoCluster) return;
    const Cluster& ca = cl[a];
    const Cluster& cb = cl[b];
    if (!(ca.velocity > cb.velocity)) return;
    const double ref = std::max(ca.born, cb.born);
    const double gap = cb.position(ref) - ca.position(ref);
    // Float noise can make the gap slightly negative; fire immediately.
    const double dt = std::max(0.0, gap / (ca.velocity - cb.velocity));
    const double t = std::max(now, ref + dt);
    if (t > t_end) return;
    queue.push({t, ca.position(t), a, b});
  };

  for (std::size_t i = 0; i + 1 < n; ++i) schedule(i, i + 1);

  // Collision time of adjacent clusters a < b, or +inf if they separate.
  auto meet_time = [&](std::size_t a, std::size_t b) {
    const Cluster& ca = cl[a];
    const Cluster& cb = cl[b];
    if (!(ca.velocity > cb.velocity)) return std::numeric_limits<double>::infinity();
    const double ref = std::max(ca.born, cb.born);
    return ref + (cb.position(ref) - ca.position(ref)) / (ca.velocity - cb.velocity);
  };

  while (!queue.empty()) {
    const detail::PendingCollision ev = queue.top();
    queue.pop();
    if (cl[ev.left].died != std::numeric_limits<double>::infinity() ||
        cl[ev.right].died != std::numeric_limits<double>::infinity())
      continue;
    const double t = ev.time;
    now = t;

    // Grow the group over neighbours arriving at the same point at the same time.
    std::size_t first = ev.left, last = ev.right;
    const double x = ev.position;
    for (std::size_t c = prev[first]; c != kNoCluster; c = prev[first]) {
      if (!detail::same_place(cl[c].position(t), x) || !detail::same_time(meet_time(c, first), t)) break;
      first = c;
    }
    for (std::size_t c = next[last]; c != kNoCluster; c = next[last]) {
      if (!detail::same_place(cl[c].position(t), x) || !detail::same_time(meet_time(last, c), t)) break;
      last = c;
    }

    CollisionEvent event;
    event.time = t;
    detail::CompensatedSum mass, momentum, moment;
    for (std::size_t c = first;; c = next[c]) {
      event.merged.push_back(c);
      mass.add(cl[c].mass);
      momentum.add(cl[c].mass * cl[c].velocity);
      moment.add(cl[c].mass * cl[c].position(t));
      if (c == last) break;
    }

    Cluster merged;
    merged.lo = cl[first].lo;
    merged.hi = cl[last].hi;
    merged.mass = mass.value();
    merged.velocity = momentum.value() / merged.mass;
    merged.born = t;
    merged.origin = moment.value() / merged.mass;
    const std::size_t id = cl.size();
    for (std::size_t c : event.merged) {
      cl[c].died = t;
      cl[c].parent = id;
    }
    cl.push_back(merged);
    event.position = merged.origin;
    event.result = id;

    prev[id] = prev[first];
    next[id] = next[last];
    if (prev[id] != kNoCluster) next[prev[id]] = id;
    if (next[id] != kNoCluster) prev[next[id]] = id;
    out.events_.push_back(std::move(event));

    schedule(prev[id], id);
    schedule(id, next[id]);
  }
  return out;
}

}  // namespace sticky
