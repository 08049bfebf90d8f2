#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/measures.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/random.hpp"

namespace sticky {

namespace detail {

// Standard bump exp(1 - 1/(1 - u^2)) on |u| < 1 and its derivative.
inline double bump(double u) {
  if (!(std::abs(u) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

inline double bump_derivative(double u) {
  if (!(std::abs(u) < 1.0)) return 0.0;
  const double d = 1.0 - u * u;
  return std::exp(1.0 - 1.0 / d) * (-2.0 * u / (d * d));
}

}  // namespace detail

/// phi(x, t) = B((x - center) / radius) * B((t - t_center) / t_radius).
/// A time window starting before 0 gives phi(., 0) != 0, so the initial-data
/// terms of the weak form are exercised.
struct TestFunction {
  double center = 0.0;
  double radius = 1.0;
  double t_center = 0.5;
  double t_radius = 0.5;

  [[nodiscard]] double value(double x, double t) const {
    return detail::bump((x - center) / radius) * detail::bump((t - t_center) / t_radius);
  }
  [[nodiscard]] double dx(double x, double t) const {
    return detail::bump_derivative((x - center) / radius) / radius * detail::bump((t - t_center) / t_radius);
  }
  [[nodiscard]] double dt(double x, double t) const {
    return detail::bump((x - center) / radius) * detail::bump_derivative((t - t_center) / t_radius) / t_radius;
  }
  [[nodiscard]] double t_begin() const { return std::max(0.0, t_center - t_radius); }
  [[nodiscard]] double t_end() const { return t_center + t_radius; }

  /// Bump centred in [x_lo, x_hi] whose time support ends by t_max.
  static TestFunction random(Rng& rng, double x_lo, double x_hi, double t_max) {
    const double width = std::max(x_hi - x_lo, 1e-3);
    TestFunction f;
    f.center = rng.uniform(x_lo, x_hi);
    f.radius = rng.uniform(0.1, 0.5) * width;
    f.t_radius = rng.uniform(0.15, 0.5) * t_max;
    f.t_center = rng.uniform(-0.9 * f.t_radius, t_max - f.t_radius);
    return f;
  }
};

enum class Balance { mass, momentum };

/// The Eulerian pair (rho_t, v) induced by a trajectory set. Holds a
/// reference to the trajectory set.
class WeakSolutionView {
 public:
  explicit WeakSolutionView(const TrajectorySet& traj) : traj_(&traj) {}

  [[nodiscard]] const TrajectorySet& trajectories() const { return *traj_; }

  /// rho_t: one atom per cluster.
  [[nodiscard]] DiscreteMeasure measure_at(double t) const {
    std::vector<Atom> atoms;
    for (std::size_t c : traj_->clusters_at(t)) {
      const Cluster& cl = traj_->clusters()[c];
      atoms.push_back({cl.position(t), cl.mass});
    }
    return DiscreteMeasure(std::move(atoms));
  }

  /// v(x, t): the right velocity of the cluster at x, 0 off the support.
  [[nodiscard]] double velocity_field_at(double t, double x) const {
    for (std::size_t c : traj_->clusters_at(t)) {
      const Cluster& cl = traj_->clusters()[c];
      if (detail::same_place(cl.position(t), x)) return cl.velocity;
    }
    return 0.0;
  }

  /// |time-space integral + initial term| for the mass or momentum balance
  /// tested against phi. Time integration is composite Gauss-Legendre with
  /// `order` nodes per panel. Panels break at collisions and wherever a
  /// cluster crosses the edge of phi's spatial support, and are no wider than
  /// a sixteenth of phi's time or transit scale.
  [[nodiscard]] double weak_form_residual(const TestFunction& phi, Balance which, std::size_t order = 12) const {
    const double t_hi = phi.t_end();
    if (t_hi > traj_->t_end() * (1.0 + 1e-12) + 1e-12) throw RangeError("test function support exceeds t_end");
    const auto& init = traj_->init();
    const auto clusters = traj_->clusters();

    double initial = 0.0;
    for (std::size_t i = 0; i < init.size(); ++i) {
      const double w = init.masses()[i] * phi.value(init.positions()[i], 0.0);
      initial += which == Balance::mass ? w : w * init.velocities()[i];
    }
    const double t_lo = phi.t_begin();
    if (!(t_hi > t_lo)) return std::abs(initial);

    std::vector<double> cuts{t_lo, t_hi};
    for (const auto& e : traj_->events())
      if (e.time > t_lo && e.time < t_hi) cuts.push_back(e.time);
    double vmax = 0.0;
    for (const Cluster& cl : clusters) {
      vmax = std::max(vmax, std::abs(cl.velocity));
      if (cl.velocity == 0.0) continue;
      for (double edge : {phi.center - phi.radius, phi.center + phi.radius}) {
        const double s = cl.born + (edge - cl.origin) / cl.velocity;
        if (s > std::max(cl.born, t_lo) && s < std::min(cl.died, t_hi)) cuts.push_back(s);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double scale = phi.t_radius;
    if (vmax > 0.0) scale = std::min(scale, phi.radius / vmax);
    const double panel = scale / 16.0;

    const GaussLegendre rule(order);
    detail::CompensatedSum integral;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      if (!(b > a)) continue;
      // Only clusters whose straight path meets the spatial support contribute.
      std::vector<std::size_t> alive;
      for (std::size_t c : traj_->clusters_at(0.5 * (a + b))) {
        const double xa = clusters[c].position(a), xb = clusters[c].position(b);
        if (std::max(xa, xb) > phi.center - phi.radius && std::min(xa, xb) < phi.center + phi.radius)
          alive.push_back(c);
      }
      if (alive.empty()) continue;
      auto integrand = [&](double t) {
        double s = 0.0;
        for (std::size_t c : alive) {
          const Cluster& cl = clusters[c];
          const double x = cl.position(t);
          const double flux = phi.dt(x, t) + cl.velocity * phi.dx(x, t);
          s += which == Balance::mass ? cl.mass * flux : cl.mass * cl.velocity * flux;
        }
        return s;
      };
      const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / panel)));
      for (std::size_t p = 0; p < panels; ++p) {
        const double pa = a + (b - a) * static_cast<double>(p) / static_cast<double>(panels);
        const double pb = a + (b - a) * static_cast<double>(p + 1) / static_cast<double>(panels);
        integral.add(rule.integrate(integrand, pa, pb));
      }
    }
    return std::abs(integral.value() + initial);
  }

  /// max over pairs of clusters of (v(x) - v(y))(x - y) - (x - y)^2 / t;
  /// 0 when fewer than two clusters exist.
  [[nodiscard]] double oleinik_residual(double t) const {
    if (!(t > 0.0)) throw DomainError("entropy condition needs t > 0");
    const auto ids = traj_->clusters_at(t);
    if (ids.size() < 2) return 0.0;
    std::vector<double> x(ids.size()), v(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      x[k] = traj_->clusters()[ids[k]].position(t);
      v[k] = traj_->clusters()[ids[k]].velocity;
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = a + 1; b < x.size(); ++b) {
        const double dx = x[a] - x[b];
        worst = std::max(worst, (v[a] - v[b]) * dx - dx * dx / t);
      }
    return worst;
  }

  [[nodiscard]] std::vector<double> energy_profile(std::span<const double> times) const {
    std::vector<double> e;
    e.reserve(times.size());
    for (double t : times) e.push_back(traj_->kinetic_energy(t));
    return e;
  }

 private:
  const TrajectorySet* traj_;
};

}  // namespace sticky
