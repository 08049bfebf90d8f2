#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sticky/convergence.hpp"
#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/measures.hpp"
#include "sticky/piecewise_linear.hpp"
#include "sticky/verification.hpp"

namespace sticky::io {

using Json = nlohmann::json;

inline constexpr const char* kFormat = "sticky-flow/1";

namespace detail {

inline void allow_keys(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw InvalidInput(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw InvalidInput(std::string(what) + ": unknown key \"" + key + "\"");
  }
  if (j.contains("format") && j.at("format") != kFormat)
    throw InvalidInput(std::string(what) + ": unsupported format " + j.at("format").dump());
}

inline const Json& require(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw InvalidInput(std::string(what) + ": missing key \"" + key + "\"");
  return j.at(key);
}

inline double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  return j.get<double>();
}

inline std::size_t index(const Json& j, const char* what) {
  if (!j.is_number_unsigned()) throw InvalidInput(std::string(what) + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

// [[a, b], ...] or [[a, b, c], ...] with a fixed row width.
inline std::vector<std::vector<double>> rows(const Json& j, std::size_t width, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != width)
      throw InvalidInput(std::string(what) + ": rows must have " + std::to_string(width) + " entries");
    std::vector<double> r;
    for (const auto& v : row) r.push_back(number(v, what));
    out.push_back(std::move(r));
  }
  return out;
}

// Infinity and "no parent" have no JSON number form; both become null.
inline Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace detail

/// Parses JSON text; syntax errors become InvalidInput.
[[nodiscard]] inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

/// Reads a whole file, or stdin for "-".
[[nodiscard]] inline std::string read_text(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline Json read_json(const std::string& path) { return parse(read_text(path)); }

/// Writes text to a file, or stdout for "-" or an empty path.
inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

// --- Inputs ----------------------------------------------------------------------

/// {"particles": [[m, x, v], ...]}
[[nodiscard]] inline ParticleInit particles_from_json(const Json& j) {
  detail::allow_keys(j, {"format", "particles"}, "particles");
  const auto rows = detail::rows(detail::require(j, "particles", "particles"), 3, "particles");
  std::vector<double> m, x, v;
  for (const auto& r : rows) {
    m.push_back(r[0]);
    x.push_back(r[1]);
    v.push_back(r[2]);
  }
  return ParticleInit(std::move(m), std::move(x), std::move(v));
}

[[nodiscard]] inline Json to_json(const ParticleInit& init) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < init.size(); ++i)
    rows.push_back({init.masses()[i], init.positions()[i], init.velocities()[i]});
  return {{"format", kFormat}, {"particles", rows}};
}

/// {"knots": [[x, v], ...]}
[[nodiscard]] inline PiecewiseLinearFn velocity_from_json(const Json& j) {
  detail::allow_keys(j, {"format", "knots"}, "v0");
  std::vector<Knot> ks;
  for (const auto& r : detail::rows(detail::require(j, "knots", "v0"), 2, "v0 knots")) ks.push_back({r[0], r[1]});
  return PiecewiseLinearFn(std::move(ks));
}

namespace detail {

inline MeasureSpec parse_spec(const Json& j) {
  if (!j.is_object()) throw InvalidSpec("measure spec: expected a JSON object");
  const auto& kind = detail::require(j, "kind", "measure spec");
  MeasureSpec spec;
  if (kind == "uniform") {
    detail::allow_keys(j, {"format", "kind", "a", "b"}, "uniform spec");
    spec = UniformSpec{detail::number(detail::require(j, "a", "uniform spec"), "a"),
                       detail::number(detail::require(j, "b", "uniform spec"), "b")};
  } else if (kind == "truncated-gaussian") {
    detail::allow_keys(j, {"format", "kind", "mean", "sd", "a", "b"}, "truncated-gaussian spec");
    const char* w = "truncated-gaussian spec";
    spec = TruncatedGaussianSpec{detail::number(detail::require(j, "mean", w), "mean"),
                                 detail::number(detail::require(j, "sd", w), "sd"),
                                 detail::number(detail::require(j, "a", w), "a"),
                                 detail::number(detail::require(j, "b", w), "b")};
  } else if (kind == "pl-density") {
    detail::allow_keys(j, {"format", "kind", "knots"}, "pl-density spec");
    std::vector<Knot> ks;
    for (const auto& r : detail::rows(detail::require(j, "knots", "pl-density spec"), 2, "pl-density knots"))
      ks.push_back({r[0], r[1]});
    try {
      spec = PlDensitySpec{PiecewiseLinearFn(std::move(ks))};
    } catch (const InvalidInput& e) {
      throw InvalidSpec(e.what());
    }
  } else if (kind == "atoms") {
    detail::allow_keys(j, {"format", "kind", "atoms"}, "atoms spec");
    std::vector<Atom> atoms;
    for (const auto& r : detail::rows(detail::require(j, "atoms", "atoms spec"), 2, "atoms")) atoms.push_back({r[0], r[1]});
    try {
      spec = AtomsSpec{DiscreteMeasure(std::move(atoms))};
    } catch (const InvalidInput& e) {
      throw InvalidSpec(e.what());
    }
  } else {
    throw InvalidSpec("measure spec: unknown kind " + kind.dump());
  }
  validate(spec);
  return spec;
}

}  // namespace detail

/// Any malformed spec, structural or numeric, surfaces as InvalidSpec.
[[nodiscard]] inline MeasureSpec spec_from_json(const Json& j) {
  try {
    return detail::parse_spec(j);
  } catch (const InvalidSpec&) {
    throw;
  } catch (const InvalidInput& e) {
    throw InvalidSpec(e.what());
  }
}

// --- Trajectories ----------------------------------------------------------------

[[nodiscard]] inline Json to_json(const TrajectorySet& traj) {
  Json clusters = Json::array();
  for (const Cluster& c : traj.clusters())
    clusters.push_back({{"lo", c.lo},
                        {"hi", c.hi},
                        {"mass", c.mass},
                        {"velocity", c.velocity},
                        {"born", c.born},
                        {"died", detail::finite_or_null(c.died)},
                        {"origin", c.origin},
                        {"parent", c.parent == kNoCluster ? Json(nullptr) : Json(c.parent)}});
  Json events = Json::array();
  for (const auto& e : traj.events())
    events.push_back({{"t", e.time}, {"x", e.position}, {"merged", e.merged}, {"result", e.result}});
  Json paths = Json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Json knots = Json::array();
    for (const Knot& k : traj.breakpoints(i)) knots.push_back({k.x, k.value});
    paths.push_back(knots);
  }
  Json out = to_json(traj.init());
  out["t_end"] = traj.t_end();
  out["events"] = events;
  out["clusters"] = clusters;
  out["breakpoints"] = paths;
  return out;
}

/// Inverse of to_json(TrajectorySet). Breakpoints are rederived from the
/// genealogy and must agree exactly with the stored ones.
[[nodiscard]] inline TrajectorySet trajectory_from_json(const Json& j) {
  detail::allow_keys(j, {"format", "particles", "t_end", "events", "clusters", "breakpoints"}, "trajectory");
  Json particles = {{"particles", detail::require(j, "particles", "trajectory")}};
  ParticleInit init = particles_from_json(particles);
  const double t_end = detail::number(detail::require(j, "t_end", "trajectory"), "t_end");

  std::vector<Cluster> clusters;
  for (const auto& c : detail::require(j, "clusters", "trajectory")) {
    detail::allow_keys(c, {"lo", "hi", "mass", "velocity", "born", "died", "origin", "parent"}, "cluster");
    Cluster cl;
    cl.lo = detail::index(detail::require(c, "lo", "cluster"), "lo");
    cl.hi = detail::index(detail::require(c, "hi", "cluster"), "hi");
    cl.mass = detail::number(detail::require(c, "mass", "cluster"), "mass");
    cl.velocity = detail::number(detail::require(c, "velocity", "cluster"), "velocity");
    cl.born = detail::number(detail::require(c, "born", "cluster"), "born");
    const auto& died = detail::require(c, "died", "cluster");
    cl.died = died.is_null() ? std::numeric_limits<double>::infinity() : detail::number(died, "died");
    cl.origin = detail::number(detail::require(c, "origin", "cluster"), "origin");
    const auto& parent = detail::require(c, "parent", "cluster");
    cl.parent = parent.is_null() ? kNoCluster : detail::index(parent, "parent");
    clusters.push_back(cl);
  }
  std::vector<CollisionEvent> events;
  for (const auto& e : detail::require(j, "events", "trajectory")) {
    detail::allow_keys(e, {"t", "x", "merged", "result"}, "event");
    CollisionEvent ev;
    ev.time = detail::number(detail::require(e, "t", "event"), "t");
    ev.position = detail::number(detail::require(e, "x", "event"), "x");
    for (const auto& id : detail::require(e, "merged", "event")) ev.merged.push_back(detail::index(id, "merged"));
    ev.result = detail::index(detail::require(e, "result", "event"), "result");
    if (ev.result >= clusters.size()) throw InvalidInput("event: result cluster out of range");
    for (std::size_t id : ev.merged)
      if (id >= clusters.size()) throw InvalidInput("event: merged cluster out of range");
    events.push_back(std::move(ev));
  }
  TrajectorySet traj(std::move(init), t_end, std::move(clusters), std::move(events));

  const auto& paths = detail::require(j, "breakpoints", "trajectory");
  if (!paths.is_array() || paths.size() != traj.size())
    throw InvalidInput("trajectory: one breakpoint list per particle required");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto stored = detail::rows(paths[i], 2, "breakpoints");
    const auto derived = traj.breakpoints(i);
    bool same = stored.size() == derived.size();
    for (std::size_t k = 0; same && k < stored.size(); ++k)
      same = stored[k][0] == derived[k].x && stored[k][1] == derived[k].value;
    if (!same) throw InvalidInput("trajectory: breakpoints disagree with the cluster genealogy");
  }
  return traj;
}

namespace detail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// particle,t_break,x_break
[[nodiscard]] inline std::string trajectory_csv(const TrajectorySet& traj) {
  std::ostringstream out;
  out << "particle,t_break,x_break\n";
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (const Knot& k : traj.breakpoints(i)) out << i << ',' << detail::fmt(k.x) << ',' << detail::fmt(k.value) << '\n';
  return out.str();
}

/// y,t,X for values[time][grid point].
[[nodiscard]] inline std::string flow_csv(const std::vector<double>& ys, const std::vector<double>& times,
                                          const std::vector<std::vector<double>>& values) {
  std::ostringstream out;
  out << "y,t,X\n";
  for (std::size_t q = 0; q < times.size(); ++q)
    for (std::size_t g = 0; g < ys.size(); ++g)
      out << detail::fmt(ys[g]) << ',' << detail::fmt(times[q]) << ',' << detail::fmt(values[q][g]) << '\n';
  return out.str();
}

// --- Reports ---------------------------------------------------------------------

[[nodiscard]] inline Json to_json(const VerificationReport& r) {
  return {{"check", r.name},
          {"instances", r.instances},
          {"worst_residual", r.worst_residual},
          {"witness", {{"seed", r.witness.seed}, {"indices", r.witness.indices}, {"times", r.witness.times}}},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

[[nodiscard]] inline VerificationReport report_from_json(const Json& j) {
  detail::allow_keys(j, {"check", "instances", "worst_residual", "witness", "tolerance", "pass"}, "report");
  VerificationReport r;
  r.name = detail::require(j, "check", "report").get<std::string>();
  r.instances = detail::index(detail::require(j, "instances", "report"), "instances");
  r.worst_residual = detail::number(detail::require(j, "worst_residual", "report"), "worst_residual");
  const auto& w = detail::require(j, "witness", "report");
  detail::allow_keys(w, {"seed", "indices", "times"}, "witness");
  r.witness.seed = detail::require(w, "seed", "witness").get<std::uint64_t>();
  r.witness.indices = detail::require(w, "indices", "witness").get<std::vector<std::size_t>>();
  r.witness.times = detail::require(w, "times", "witness").get<std::vector<double>>();
  r.tolerance = detail::number(detail::require(j, "tolerance", "report"), "tolerance");
  r.pass = detail::require(j, "pass", "report").get<bool>();
  return r;
}

[[nodiscard]] inline Json to_json(const std::vector<VerificationReport>& reports) {
  Json list = Json::array();
  bool all = true;
  for (const auto& r : reports) {
    list.push_back(to_json(r));
    all = all && r.pass;
  }
  return {{"format", kFormat}, {"pass", all}, {"reports", list}};
}

[[nodiscard]] inline Json to_json(const RefinementStudy& study) {
  Json table = Json::array();
  for (const auto& p : study.pairs)
    table.push_back({{"level_pair", {study.levels[p.coarse], study.levels[p.fine]}},
                     {"t", p.t},
                     {"D", p.sup_diff},
                     {"W1", p.w1},
                     {"joint", p.joint}});
  Json levels = Json::array();
  for (const auto& lv : study.results)
    levels.push_back({{"n", lv.n},
                      {"events", lv.trajectories.events().size()},
                      {"lipschitz_residual", lv.lipschitz_residual},
                      {"bound_ratio", lv.bound_ratio}});
  return {{"format", kFormat},
          {"levels", levels},
          {"B", study.bound},
          {"monotone", study.monotone()},
          {"diverging", study.diverging()},
          {"table", table}};
}

}  // namespace sticky::io
