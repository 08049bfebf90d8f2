#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sticky/error.hpp"
#include "sticky/piecewise_linear.hpp"

namespace sticky {

struct Atom {
  double x;
  double mass;
};

namespace detail {

// Neumaier summation; masses of 10^6 equal atoms must still total 1 to 1e-12.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline bool coincident(double a, double b) {
  return std::abs(a - b) <= 1e-14 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/// Probability measure with finitely many atoms, stored by increasing position.
class DiscreteMeasure {
 public:
  static constexpr double kMassTolerance = 1e-12;

  DiscreteMeasure() = default;

  /// Atoms may arrive unsorted; coincident positions are merged by summing masses.
  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(canonical(std::move(atoms))) {
    if (std::abs(total(atoms_) - 1.0) > kMassTolerance)
      throw InvalidInput("discrete measure masses must sum to 1");
  }

  /// Rescales positive masses to total 1.
  static DiscreteMeasure normalized(std::vector<Atom> atoms) {
    auto c = canonical(std::move(atoms));
    const double z = total(c);
    for (Atom& a : c) a.mass /= z;
    DiscreteMeasure m;
    m.atoms_ = std::move(c);
    return m;
  }

  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({{x, 1.0}}); }

  [[nodiscard]] std::span<const Atom> atoms() const { return atoms_; }
  [[nodiscard]] std::size_t size() const { return atoms_.size(); }
  [[nodiscard]] bool empty() const { return atoms_.empty(); }
  [[nodiscard]] const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  [[nodiscard]] std::vector<double> positions() const {
    std::vector<double> xs(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) xs[i] = atoms_[i].x;
    return xs;
  }
  [[nodiscard]] std::vector<double> masses() const {
    std::vector<double> ms(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) ms[i] = atoms_[i].mass;
    return ms;
  }

  [[nodiscard]] double total_mass() const { return total(atoms_); }

  [[nodiscard]] double mean() const {
    detail::CompensatedSum s;
    for (const Atom& a : atoms_) s.add(a.mass * a.x);
    return s.value();
  }

  /// Index of an atom at x (within the coincidence tolerance), or size() if none.
  [[nodiscard]] std::size_t find(double x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.x < v; });
    if (it != atoms_.end() && detail::coincident(it->x, x)) return static_cast<std::size_t>(it - atoms_.begin());
    if (it != atoms_.begin() && detail::coincident(std::prev(it)->x, x))
      return static_cast<std::size_t>(it - atoms_.begin()) - 1;
    return atoms_.size();
  }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.atoms_[i].x != b.atoms_[i].x || a.atoms_[i].mass != b.atoms_[i].mass) return false;
    return true;
  }

 private:
  static std::vector<Atom> canonical(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidInput("discrete measure needs at least one atom");
    for (const Atom& a : atoms) {
      if (!std::isfinite(a.x) || !std::isfinite(a.mass)) throw InvalidInput("atom is not finite");
      if (!(a.mass > 0.0)) throw InvalidInput("atom masses must be positive");
    }
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const Atom& a : atoms) {
      if (!out.empty() && detail::coincident(out.back().x, a.x))
        out.back().mass += a.mass;
      else
        out.push_back(a);
    }
    return out;
  }

  static double total(std::span<const Atom> atoms) {
    detail::CompensatedSum s;
    for (const Atom& a : atoms) s.add(a.mass);
    return s.value();
  }

  std::vector<Atom> atoms_;
};

[[nodiscard]] inline double second_moment(const DiscreteMeasure& m) {
  detail::CompensatedSum s;
  for (const Atom& a : m.atoms()) s.add(a.mass * a.x * a.x);
  return s.value();
}

/// Exact W1 distance on the line via the quantile coupling
/// W1 = integral over u in [0,1] of |Q_a(u) - Q_b(u)|.
[[nodiscard]] inline double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::size_t i = 0, j = 0;
  double ca = a[0].mass, cb = b[0].mass;  // cumulative mass through atoms i and j
  double u = 0.0;
  detail::CompensatedSum w;
  while (i < a.size() && j < b.size()) {
    const double next = std::min(ca, cb);
    w.add((next - u) * std::abs(a[i].x - b[j].x));
    u = next;
    const bool adv_a = ca <= cb;
    const bool adv_b = cb <= ca;
    if (adv_a && ++i < a.size()) ca += a[i].mass;
    if (adv_b && ++j < b.size()) cb += b[j].mass;
  }
  return w.value();
}

// ---------------------------------------------------------------------------
// Continuum initial data and its quantile discretization.

struct UniformSpec {
  double a;
  double b;
};

struct TruncatedGaussianSpec {
  double mean;
  double sd;
  double a;
  double b;
};

/// Density proportional to a nonnegative piecewise-linear function on its knot
/// span (zero outside).
struct PlDensitySpec {
  PiecewiseLinearFn density;
};

struct AtomsSpec {
  DiscreteMeasure measure;
};

using MeasureSpec = std::variant<AtomsSpec, UniformSpec, TruncatedGaussianSpec, PlDensitySpec>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline const boost::math::normal& standard_normal() {
  static const boost::math::normal n(0.0, 1.0);
  return n;
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) * 0.398942280401432677939946; }

struct GaussianParts {
  double alpha, beta;  // standardized truncation bounds
  double z;            // normalizing mass Phi(beta) - Phi(alpha)
};

inline GaussianParts gaussian_parts(const TruncatedGaussianSpec& g) {
  const double alpha = (g.a - g.mean) / g.sd;
  const double beta = (g.b - g.mean) / g.sd;
  double z;
  if (alpha > 0.0)
    z = boost::math::cdf(boost::math::complement(standard_normal(), alpha)) -
        boost::math::cdf(boost::math::complement(standard_normal(), beta));
  else
    z = boost::math::cdf(standard_normal(), beta) - boost::math::cdf(standard_normal(), alpha);
  return {alpha, beta, z};
}

// Standardized quantile of the truncated normal at level u in [0, 1].
inline double gaussian_std_quantile(const GaussianParts& p, double u) {
  if (u <= 0.0) return p.alpha;
  if (u >= 1.0) return p.beta;
  double q;
  if (p.alpha > 0.0) {
    const double upper = boost::math::cdf(boost::math::complement(standard_normal(), p.alpha)) - u * p.z;
    q = boost::math::quantile(boost::math::complement(standard_normal(), upper));
  } else {
    const double lower = boost::math::cdf(standard_normal(), p.alpha) + u * p.z;
    q = boost::math::quantile(standard_normal(), lower);
  }
  return std::clamp(q, p.alpha, p.beta);
}

// Piecewise-linear density bookkeeping: cumulative mass and first moment at knots.
struct PlDensityTable {
  std::vector<double> x, f, cum0, cum1;
  double z = 0.0;

  explicit PlDensityTable(const PiecewiseLinearFn& d) {
    for (const Knot& k : d.knots()) {
      if (k.value < 0.0) throw InvalidSpec("pl-density must be nonnegative");
      x.push_back(k.x);
      f.push_back(k.value);
    }
    cum0.assign(x.size(), 0.0);
    cum1.assign(x.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double h = x[k + 1] - x[k];
      cum0[k + 1] = cum0[k] + 0.5 * h * (f[k] + f[k + 1]);
      cum1[k + 1] = cum1[k] + partial_moment(k, h);
    }
    z = cum0.back();
    if (!(z > 0.0) || !std::isfinite(z)) throw InvalidSpec("pl-density is not normalizable");
  }

  [[nodiscard]] double slope(std::size_t k) const { return (f[k + 1] - f[k]) / (x[k + 1] - x[k]); }

  // Integral of x f(x) over [x_k, x_k + d].
  [[nodiscard]] double partial_moment(std::size_t k, double d) const {
    const double s = slope(k);
    return x[k] * (f[k] * d + 0.5 * s * d * d) + 0.5 * f[k] * d * d + s * d * d * d / 3.0;
  }

  // Unnormalized quantile: smallest q with cumulative mass(q) = r, r in [0, z].
  [[nodiscard]] std::pair<std::size_t, double> locate(double r) const {
    auto it = std::upper_bound(cum0.begin(), cum0.end(), r);
    std::size_t k = it == cum0.begin() ? 0 : static_cast<std::size_t>(it - cum0.begin()) - 1;
    k = std::min(k, x.size() - 2);
    const double rem = std::max(0.0, r - cum0[k]);
    const double s = slope(k);
    const double disc = std::max(0.0, f[k] * f[k] + 2.0 * s * rem);
    double d;
    const double denom = f[k] + std::sqrt(disc);
    if (denom > 0.0)
      d = 2.0 * rem / denom;
    else
      d = 0.0;
    d = std::clamp(d, 0.0, x[k + 1] - x[k]);
    return {k, d};
  }

  [[nodiscard]] double quantile(double u) const {
    auto [k, d] = locate(u * z);
    return x[k] + d;
  }

  [[nodiscard]] double first_moment_to(double u) const {
    auto [k, d] = locate(u * z);
    return cum1[k] + partial_moment(k, d);
  }
};

inline void check_finite(std::initializer_list<double> vs) {
  for (double v : vs)
    if (!std::isfinite(v)) throw InvalidSpec("measure spec has non-finite parameter");
}

}  // namespace detail

/// Throws InvalidSpec when the spec is not a bounded, normalizable probability law.
inline void validate(const MeasureSpec& spec) {
  std::visit(detail::overloaded{
                 [](const AtomsSpec& s) {
                   if (s.measure.empty()) throw InvalidSpec("atoms spec is empty");
                 },
                 [](const UniformSpec& s) {
                   detail::check_finite({s.a, s.b});
                   if (!(s.b > s.a)) throw InvalidSpec("uniform spec needs a < b");
                 },
                 [](const TruncatedGaussianSpec& s) {
                   detail::check_finite({s.mean, s.sd, s.a, s.b});
                   if (!(s.sd > 0.0)) throw InvalidSpec("truncated-gaussian needs sd > 0");
                   if (!(s.b > s.a)) throw InvalidSpec("truncated-gaussian needs a < b");
                   if (!(detail::gaussian_parts(s).z > 0.0))
                     throw InvalidSpec("truncated-gaussian is not normalizable");
                 },
                 [](const PlDensitySpec& s) { detail::PlDensityTable t(s.density); },
             },
             spec);
}

/// Smallest closed interval containing the support.
[[nodiscard]] inline std::pair<double, double> support_hull(const MeasureSpec& spec) {
  return std::visit(detail::overloaded{
                        [](const AtomsSpec& s) {
                          return std::pair{s.measure.atoms().front().x, s.measure.atoms().back().x};
                        },
                        [](const UniformSpec& s) { return std::pair{s.a, s.b}; },
                        [](const TruncatedGaussianSpec& s) { return std::pair{s.a, s.b}; },
                        [](const PlDensitySpec& s) { return std::pair{s.density.front_x(), s.density.back_x()}; },
                    },
                    spec);
}

/// Left-continuous quantile function Q(u), u in [0, 1].
[[nodiscard]] inline double quantile(const MeasureSpec& spec, double u) {
  u = std::clamp(u, 0.0, 1.0);
  return std::visit(
      detail::overloaded{
          [u](const AtomsSpec& s) {
            double c = 0.0;
            for (const Atom& a : s.measure.atoms()) {
              c += a.mass;
              if (u <= c) return a.x;
            }
            return s.measure.atoms().back().x;
          },
          [u](const UniformSpec& s) { return s.a + (s.b - s.a) * u; },
          [u](const TruncatedGaussianSpec& s) {
            return s.mean + s.sd * detail::gaussian_std_quantile(detail::gaussian_parts(s), u);
          },
          [u](const PlDensitySpec& s) { return detail::PlDensityTable(s.density).quantile(u); },
      },
      spec);
}

[[nodiscard]] inline double spec_mean(const MeasureSpec& spec) {
  return std::visit(detail::overloaded{
                        [](const AtomsSpec& s) { return s.measure.mean(); },
                        [](const UniformSpec& s) { return 0.5 * (s.a + s.b); },
                        [](const TruncatedGaussianSpec& s) {
                          const auto p = detail::gaussian_parts(s);
                          return s.mean + s.sd * (detail::normal_pdf(p.alpha) - detail::normal_pdf(p.beta)) / p.z;
                        },
                        [](const PlDensitySpec& s) {
                          detail::PlDensityTable t(s.density);
                          return t.cum1.back() / t.z;
                        },
                    },
                    spec);
}

[[nodiscard]] inline double spec_second_moment(const MeasureSpec& spec) {
  return std::visit(
      detail::overloaded{
          [](const AtomsSpec& s) { return second_moment(s.measure); },
          [](const UniformSpec& s) { return (s.a * s.a + s.a * s.b + s.b * s.b) / 3.0; },
          [](const TruncatedGaussianSpec& s) {
            const auto p = detail::gaussian_parts(s);
            const double pa = detail::normal_pdf(p.alpha), pb = detail::normal_pdf(p.beta);
            const double m1 = (pa - pb) / p.z;
            const double var = 1.0 + (p.alpha * pa - p.beta * pb) / p.z - m1 * m1;
            const double mean = s.mean + s.sd * m1;
            return s.sd * s.sd * var + mean * mean;
          },
          [](const PlDensitySpec& s) {
            // x^2 f(x) is cubic on each segment: Simpson's rule is exact there.
            detail::PlDensityTable t(s.density);
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < t.x.size(); ++k) {
              const double a = t.x[k], b = t.x[k + 1], m = 0.5 * (a + b);
              const double fm = 0.5 * (t.f[k] + t.f[k + 1]);
              acc += (b - a) / 6.0 * (a * a * t.f[k] + 4.0 * m * m * fm + b * b * t.f[k + 1]);
            }
            return acc / t.z;
          },
      },
      spec);
}

/// n equal-mass atoms, the i-th at the conditional mean of the i-th quantile
/// block [i/n, (i+1)/n]. An atomic spec with exactly n atoms is returned as is.
[[nodiscard]] inline DiscreteMeasure discretize(const MeasureSpec& spec, std::size_t n) {
  if (n == 0) throw InvalidInput("discretize: n must be positive");
  validate(spec);
  if (const auto* atoms = std::get_if<AtomsSpec>(&spec); atoms && atoms->measure.size() == n) return atoms->measure;
  const double w = 1.0 / static_cast<double>(n);
  std::vector<Atom> out(n);
  std::visit(
      detail::overloaded{
          [&](const AtomsSpec& s) {
            // Sweep quantile blocks against atoms, accumulating overlap * x.
            const auto atoms = s.measure.atoms();
            std::size_t j = 0;
            double used = 0.0;  // mass of atom j already assigned
            for (std::size_t i = 0; i < n; ++i) {
              double need = w, acc = 0.0;
              while (need > 0.0 && j < atoms.size()) {
                const double take = std::min(need, atoms[j].mass - used);
                acc += take * atoms[j].x;
                need -= take;
                used += take;
                if (atoms[j].mass - used <= 1e-15 * atoms[j].mass) {
                  ++j;
                  used = 0.0;
                }
              }
              if (need > 0.0) acc += need * atoms.back().x;  // rounding residue
              out[i] = {acc / w, w};
            }
          },
          [&](const UniformSpec& s) {
            for (std::size_t i = 0; i < n; ++i)
              out[i] = {s.a + (s.b - s.a) * (static_cast<double>(i) + 0.5) * w, w};
          },
          [&](const TruncatedGaussianSpec& s) {
            const auto p = detail::gaussian_parts(s);
            double lo = p.alpha, plo = detail::normal_pdf(lo);
            for (std::size_t i = 0; i < n; ++i) {
              const double hi =
                  i + 1 == n ? p.beta : detail::gaussian_std_quantile(p, static_cast<double>(i + 1) * w);
              const double phi = detail::normal_pdf(hi);
              out[i] = {s.mean + s.sd * (plo - phi) / (p.z * w), w};
              lo = hi;
              plo = phi;
            }
          },
          [&](const PlDensitySpec& s) {
            detail::PlDensityTable t(s.density);
            double prev = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double cur = i + 1 == n ? t.cum1.back() : t.first_moment_to(static_cast<double>(i + 1) * w);
              out[i] = {(cur - prev) / (t.z * w), w};
              prev = cur;
            }
          },
      },
      spec);
  return DiscreteMeasure::normalized(std::move(out));
}

}  // namespace sticky
