// Subcommands of the sticky_flow command-line tool.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sticky/cli.hpp"
#include "sticky/sticky.hpp"

namespace {

using sticky::io::Json;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// --- simulate --------------------------------------------------------------------

struct SimulateArgs {
  std::string input;
  double t_end = 1.0;
  std::string output = "-";
  std::string csv;
};

int run_simulate(const SimulateArgs& a) {
  const auto init = sticky::io::particles_from_json(sticky::io::read_json(a.input));
  if (!(a.t_end >= 0.0)) throw sticky::InvalidInput("--t-end must be nonnegative");
  const auto traj = sticky::simulate(init, a.t_end);
  sticky::io::write_text(a.output, dump(sticky::io::to_json(traj)));
  if (!a.csv.empty()) sticky::io::write_text(a.csv, sticky::io::trajectory_csv(traj));
  return kOk;
}

// --- flow ------------------------------------------------------------------------

struct FlowArgs {
  std::string input;
  std::string v0;
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<double> grid;
  std::size_t grid_count = 64;
  std::string output = "-";
};

int run_flow(FlowArgs a) {
  const auto init = sticky::io::particles_from_json(sticky::io::read_json(a.input));
  if (a.times.empty()) throw sticky::InvalidInput("--times is empty");
  double t_end = 0.0;
  for (double t : a.times) {
    if (!(t >= 0.0)) throw sticky::InvalidInput("--times must be nonnegative");
    t_end = std::max(t_end, t);
  }
  std::optional<sticky::PiecewiseLinearFn> v0;
  if (!a.v0.empty()) v0 = sticky::io::velocity_from_json(sticky::io::read_json(a.v0));
  const auto traj = sticky::simulate(init, t_end);
  const sticky::FlowMap map(traj, v0);
  if (a.grid.empty()) {
    const double lo = init.positions().front(), hi = init.positions().back();
    if (a.grid_count < 2 || lo == hi) {
      a.grid.assign(init.positions().begin(), init.positions().end());
    } else {
      for (std::size_t g = 0; g < a.grid_count; ++g)
        a.grid.push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(a.grid_count - 1));
    }
  }
  std::vector<std::vector<double>> values;
  for (double t : a.times) values.push_back(map.eval_many(a.grid, t));
  sticky::io::write_text(a.output, sticky::io::flow_csv(a.grid, a.times, values));
  return kOk;
}

// --- verify ----------------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  std::string v0;
  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t instances = 1;
  std::optional<double> tol;
  double t_end = 2.0;
  std::size_t order = 12;
  std::size_t samples = 50;
  std::size_t weak_tests = 10;
  unsigned threads = 0;
  std::string output = "-";
};

int run_verify(const VerifyArgs& a) {
  sticky::SuiteConfig cfg;
  if (!a.checks.empty()) cfg.checks = a.checks;
  for (const auto& c : cfg.checks)
    if (std::find(sticky::known_checks().begin(), sticky::known_checks().end(), c) == sticky::known_checks().end())
      throw sticky::InvalidInput("unknown check: " + c);
  if (!(a.t_end > 0.0)) throw sticky::InvalidInput("--t-end must be positive");
  if (a.order == 0) throw sticky::InvalidInput("--order must be positive");
  cfg.seed = a.seed;
  cfg.n = a.n;
  cfg.instances = a.instances;
  cfg.tol = a.tol;
  cfg.t_end = a.t_end;
  cfg.order = a.order;
  cfg.samples = a.samples;
  cfg.weak_tests = a.weak_tests;
  cfg.threads = a.threads;

  std::vector<sticky::VerificationReport> reports;
  if (!a.input.empty()) {
    const auto init = sticky::io::particles_from_json(sticky::io::read_json(a.input));
    std::optional<sticky::PiecewiseLinearFn> v0;
    if (!a.v0.empty()) v0 = sticky::io::velocity_from_json(sticky::io::read_json(a.v0));
    reports = sticky::run_checks(sticky::simulate(init, a.t_end), cfg, a.seed, v0);
  } else {
    reports = sticky::run_suite(cfg);
  }
  const auto json = sticky::io::to_json(reports);
  sticky::io::write_text(a.output, dump(json));
  return json.at("pass").get<bool>() ? kOk : kCheckFailed;
}

// --- converge --------------------------------------------------------------------

struct ConvergeArgs {
  std::string spec;
  std::string v0;
  std::vector<std::size_t> levels{50, 100, 200, 400};
  std::vector<double> times{0.5, 1.0, 2.0};
  std::size_t grid_count = 64;
  unsigned threads = 0;
  std::string output = "-";
};

int run_converge(const ConvergeArgs& a) {
  const auto spec = sticky::io::spec_from_json(sticky::io::read_json(a.spec));
  const auto v0 = sticky::io::velocity_from_json(sticky::io::read_json(a.v0));
  const auto study =
      sticky::refinement_study(spec, v0, a.levels, a.times, sticky::quantile_grid(spec, a.grid_count), a.threads);
  sticky::io::write_text(a.output, dump(sticky::io::to_json(study)));
  return study.diverging() ? kCheckFailed : kOk;
}

// --- weak-residual ---------------------------------------------------------------

struct WeakArgs {
  std::string input;
  double t_end = 2.0;
  std::size_t tests = 10;
  std::size_t order = 12;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::string output = "-";
};

int run_weak(const WeakArgs& a) {
  const auto init = sticky::io::particles_from_json(sticky::io::read_json(a.input));
  if (!(a.t_end > 0.0)) throw sticky::InvalidInput("--t-end must be positive");
  if (a.order == 0) throw sticky::InvalidInput("--order must be positive");
  const auto traj = sticky::simulate(init, a.t_end);
  std::vector<sticky::VerificationReport> reports{
      sticky::check_weak_form(traj, sticky::Balance::mass, a.tests, a.order, a.seed, a.tol),
      sticky::check_weak_form(traj, sticky::Balance::momentum, a.tests, a.order, a.seed, a.tol)};
  const auto json = sticky::io::to_json(reports);
  sticky::io::write_text(a.output, dump(json));
  return json.at("pass").get<bool>() ? kOk : kCheckFailed;
}

}  // namespace

namespace sticky::cli {

int run(int argc, char** argv) {
  CLI::App app{"Sticky particle dynamics in Lagrangian coordinates"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Event-driven simulation; writes the trajectory set as JSON");
  simulate->add_option("--input", sim.input, "Particle JSON, or - for stdin")->required();
  simulate->add_option("--t-end", sim.t_end, "Final time")->capture_default_str();
  simulate->add_option("--output", sim.output, "Output path (default stdout)");
  simulate->add_option("--csv", sim.csv, "Also write particle,t_break,x_break CSV here");

  FlowArgs flow;
  auto* flow_cmd = app.add_subcommand("flow", "Evaluate the flow map X(y, t) on a grid; writes y,t,X CSV");
  flow_cmd->add_option("--input", flow.input, "Particle JSON, or - for stdin")->required();
  flow_cmd->add_option("--v0", flow.v0, "Initial velocity JSON (caps the extension constant)");
  flow_cmd->add_option("--times", flow.times, "Comma-separated times")->delimiter(',');
  flow_cmd->add_option("--grid", flow.grid, "Comma-separated y values")->delimiter(',');
  flow_cmd->add_option("--grid-count", flow.grid_count, "Uniform grid size over the initial positions")
      ->capture_default_str();
  flow_cmd->add_option("--output", flow.output, "Output path (default stdout)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run property checks; writes a JSON report");
  verify->add_option("--input", ver.input, "Particle JSON; omit to check seeded random instances");
  verify->add_option("--v0", ver.v0, "Initial velocity JSON for gap-bound (default: interpolate the data)");
  verify->add_option("--checks", ver.checks, "Comma-separated check names")->delimiter(',');
  verify->add_option("--seed", ver.seed, "Base seed")->capture_default_str();
  verify->add_option("--n", ver.n, "Particles per random instance (0: random in 2..500)")->capture_default_str();
  verify->add_option("--instances", ver.instances, "Number of random instances")->capture_default_str();
  verify->add_option("--tol", ver.tol, "Tolerance for every check (default: per check)");
  verify->add_option("--t-end", ver.t_end, "Final time")->capture_default_str();
  verify->add_option("--order", ver.order, "Gauss-Legendre order for weak-form checks")->capture_default_str();
  verify->add_option("--samples", ver.samples, "Sample times per instance")->capture_default_str();
  verify->add_option("--weak-tests", ver.weak_tests, "Test functions per weak-form check")->capture_default_str();
  verify->add_option("--threads", ver.threads, "Worker threads (0: all cores)")->capture_default_str();
  verify->add_option("--output", ver.output, "Output path (default stdout)");

  ConvergeArgs conv;
  auto* converge = app.add_subcommand("converge", "Refinement study of the flow map; writes a JSON table");
  converge->add_option("--spec", conv.spec, "Measure spec JSON")->required();
  converge->add_option("--v0", conv.v0, "Initial velocity JSON")->required();
  converge->add_option("--levels", conv.levels, "Comma-separated atom counts")->delimiter(',');
  converge->add_option("--times", conv.times, "Comma-separated times")->delimiter(',');
  converge->add_option("--grid-count", conv.grid_count, "Quantile grid size")->capture_default_str();
  converge->add_option("--threads", conv.threads, "Worker threads (0: all cores)")->capture_default_str();
  converge->add_option("--output", conv.output, "Output path (default stdout)");

  WeakArgs weak;
  auto* weak_cmd = app.add_subcommand("weak-residual", "Weak-form residuals against random bump test functions");
  weak_cmd->add_option("--input", weak.input, "Particle JSON, or - for stdin")->required();
  weak_cmd->add_option("--t-end", weak.t_end, "Final time")->capture_default_str();
  weak_cmd->add_option("--tests", weak.tests, "Number of test functions")->capture_default_str();
  weak_cmd->add_option("--order", weak.order, "Gauss-Legendre order")->capture_default_str();
  weak_cmd->add_option("--seed", weak.seed, "Seed for the test functions")->capture_default_str();
  weak_cmd->add_option("--tol", weak.tol, "Pass threshold")->capture_default_str();
  weak_cmd->add_option("--output", weak.output, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*flow_cmd) return run_flow(flow);
    if (*verify) return run_verify(ver);
    if (*converge) return run_converge(conv);
    if (*weak_cmd) return run_weak(weak);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace sticky::cli
