#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "sticky/verification.hpp"

namespace {

using namespace sticky;
using sticky::testing::trio;
using sticky::testing::single;
using sticky::testing::symmetric_triple;

PiecewiseLinearFn pl(std::vector<double> x, std::vector<double> y) { return PiecewiseLinearFn::interpolate(x, y); }

PiecewiseLinearFn trio_v0() { return pl({0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}); }

TEST(Qspp, TrioHandValues) {
  const auto traj = simulate(trio(), 3.0);
  // |x3 - x1| / t at t = 1 and t = 2: 2 / 1 and 2.5 / 2.
  EXPECT_DOUBLE_EQ((traj.position_at(2, 1.0) - traj.position_at(0, 1.0)) / 1.0, 2.0);
  EXPECT_DOUBLE_EQ((traj.position_at(2, 2.0) - traj.position_at(0, 2.0)) / 2.0, 1.25);
  const std::vector<double> ts{1.0, 2.0};
  const auto rep = check_qspp(traj, ts);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.worst_residual, 0.0);
}

TEST(Qspp, MergedPairIsZero) {
  const auto traj = simulate(symmetric_triple(), 3.0);
  const std::vector<double> ts{1.0, 1.5, 3.0};
  const auto rep = check_qspp(traj, ts);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.worst_residual, 0.0);
}

TEST(Qspp, DetectsFabricatedSeparation) {
  // Particle 3 sent left at speed 3 passes through the others: the gap to
  // particle 1 is 0 at t = 0.5 and 5.5 at t = 2.
  const auto traj = simulate(trio(), 3.0);
  std::vector<Cluster> clusters(traj.clusters().begin(), traj.clusters().end());
  clusters[2].velocity = -3.0;
  const std::vector<CollisionEvent> events(traj.events().begin(), traj.events().end());
  const TrajectorySet bad(traj.init(), 3.0, clusters, events);
  const std::vector<double> ts{0.5, 2.0};
  const auto rep = check_qspp(bad, ts);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.worst_residual, 0.1);
}

TEST(GapBound, TrioTotalVariationHolds) {
  const auto traj = simulate(trio(), 3.0);
  const std::vector<double> ts{2.0};
  const auto rep = check_gap_bound(traj, trio_v0(), ts, GapBound::total_variation);
  EXPECT_TRUE(rep.pass);
  // Upper slack: pair (1, 3) 2.5 - 6, pair (1, 2) 0 - 3, pair (2, 3) 2.5 - 4.
  // The merged pair (1, 2) has gap 0, so the lower bound gap >= 0 is tight.
  EXPECT_EQ(rep.worst_residual, 0.0);
}

TEST(GapBound, TrioNaiveBoundFailsAfterCollision) {
  const auto traj = simulate(trio(), 3.0);
  const std::vector<double> late{2.0};
  const auto rep = check_gap_bound(traj, trio_v0(), late, GapBound::two_point);
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.worst_residual, 0.5, 1e-12);  // 2.5 > 2
  EXPECT_EQ(rep.witness.indices, (std::vector<std::size_t>{0, 2}));

  // Before the collision everything moves freely and the naive bound holds.
  const std::vector<double> early{0.25, 0.5, 0.75, 1.0};
  EXPECT_TRUE(check_gap_bound(traj, trio_v0(), early, GapBound::two_point).pass);
  for (double t : {1.25, 1.5, 2.5, 3.0}) {
    const std::vector<double> one{t};
    EXPECT_FALSE(check_gap_bound(traj, trio_v0(), one, GapBound::two_point).pass) << t;
  }
}

TEST(GapBound, MonotoneVelocitiesSharpenedBoundHolds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 30;
    std::vector<double> m(n, 1.0 / n), x(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) + rng.uniform(0.0, 0.5);
      v[i] = 1.0 - 2.0 * static_cast<double>(i) / n + rng.uniform(-0.01, 0.0);  // decreasing
    }
    const ParticleInit init(m, x, v);
    const auto traj = simulate(init, 5.0);
    const auto ts = sample_times(traj, 30, seed);
    const auto rep = check_gap_bound(traj, interpolate_velocities(init), ts, GapBound::two_point, seed);
    EXPECT_TRUE(rep.pass) << "seed " << seed << " residual " << rep.worst_residual;
  }
}

TEST(GapBound, MismatchedVelocityProfileThrows) {
  const auto traj = simulate(trio(), 1.0);
  const std::vector<double> ts{0.5};
  const auto wrong = pl({0.0, 2.0}, {1.0, 1.0});
  EXPECT_THROW((void)check_gap_bound(traj, wrong, ts), InvalidInput);
}

TEST(GapConcavity, Trio) {
  const auto traj = simulate(trio(), 3.0);
  // Gap of (1, 2) is 1 - t until t = 1, then 0.
  for (double t : {0.25, 0.5, 0.9}) EXPECT_NEAR(traj.position_at(1, t) - traj.position_at(0, t), 1.0 - t, 1e-15);
  const std::vector<double> ts{0.5, 1.0, 2.0};
  const auto rep = check_gap_concavity(traj, ts);
  EXPECT_TRUE(rep.pass);
}

TEST(GapConcavity, SeparatingPairIsTrivial) {
  const ParticleInit init({0.5, 0.5}, {0.0, 1.0}, {-1.0, 1.0});
  const auto traj = simulate(init, 2.0);
  EXPECT_TRUE(traj.events().empty());
  const std::vector<double> ts{0.5, 2.0};
  const auto rep = check_gap_concavity(traj, ts);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.worst_residual, 0.0);
}

TEST(Averaging, TrioIdentityAtOneAndAHalf) {
  const auto traj = simulate(trio(), 3.0);
  // g = id evaluated at t = 1.5 positions (1.25, 1.25, 3.5):
  // with velocities at 1.5 (0.5, 0.5, 1) and at 0 (1, 0, 1) both give 19/12.
  const double third = 1.0 / 3.0;
  const double at_t = third * (1.25 * 0.5 + 1.25 * 0.5 + 3.5 * 1.0);
  const double at_0 = third * (1.25 * 1.0 + 1.25 * 0.0 + 3.5 * 1.0);
  EXPECT_NEAR(at_t, 19.0 / 12.0, 1e-15);
  EXPECT_NEAR(at_0, 19.0 / 12.0, 1e-15);

  const std::vector<NamedFunction> family{{"id", [](double x) { return x; }}};
  const std::vector<double> ts{1.5};
  const auto rep = check_averaging(traj, family, ts);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.worst_residual, 1e-15);
}

TEST(Averaging, ConstantGIsMomentum) {
  const auto inst = random_instance(3, 40);
  const auto traj = simulate(inst.init, inst.t_end);
  const std::vector<NamedFunction> family{{"1", [](double) { return 1.0; }}};
  const auto ts = sample_times(traj, 20, 3);
  const auto rep = check_averaging(traj, family, ts);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.worst_residual, 1e-14);
}

TEST(Averaging, DetectsWrongMergeVelocity) {
  const auto traj = simulate(trio(), 3.0);
  std::vector<Cluster> clusters(traj.clusters().begin(), traj.clusters().end());
  clusters.back().velocity = 0.8;
  const std::vector<CollisionEvent> events(traj.events().begin(), traj.events().end());
  const TrajectorySet bad(traj.init(), 3.0, clusters, events);
  const std::vector<double> ts{2.0};
  EXPECT_FALSE(check_averaging(bad, default_averaging_family(), ts).pass);
}

TEST(Oracle, SingleParticleIsExact) {
  for (double dt : {1e-1, 3e-3, 1e-4}) {
    const auto rep = compare_oracle(single(0.75), 2.0, dt, 1e-3);
    EXPECT_TRUE(rep.pass);
    // Only rounding from the repeated free-flight updates remains.
    EXPECT_LE(rep.worst_residual, 1e-10) << dt;
  }
}

TEST(Oracle, TrioAgreesAtTwo) {
  const auto paths = oracle_simulate(trio(), 2.0, 1e-4);
  ASSERT_DOUBLE_EQ(paths.times.back(), 2.0);
  EXPECT_NEAR(paths.positions.back()[0], 1.5, 1e-3);
  EXPECT_NEAR(paths.positions.back()[1], 1.5, 1e-3);
  EXPECT_NEAR(paths.positions.back()[2], 4.0, 1e-3);
  EXPECT_TRUE(compare_oracle(trio(), 2.0, 1e-4, 1e-3).pass);
}

TEST(Oracle, SeededInstancesWithinTolerance) {
  for (std::size_t n : {3u, 5u, 10u}) {
    const auto inst = random_instance(100 + n, n);
    const auto rep = compare_oracle(inst.init, inst.t_end, 1e-5, 1e-3, inst.seed);
    EXPECT_TRUE(rep.pass) << "n " << n << " residual " << rep.worst_residual;
  }
}

TEST(Oracle, ErrorDecreasesUnderRefinement) {
  const auto inst = random_instance(11, 10);
  ASSERT_FALSE(simulate(inst.init, inst.t_end).events().empty());
  double last = std::numeric_limits<double>::infinity();
  for (double dt : {1e-3, 1e-4, 1e-5}) {
    const double err = compare_oracle(inst.init, inst.t_end, dt, 1.0).worst_residual;
    EXPECT_LT(err, last) << dt;
    last = err;
  }
}

TEST(Oracle, GridStatesAreExactForIsolatedCollision) {
  // Pooling at the centre of mass reproduces the exact state at every grid
  // time; only the interpolant between grid times can be off.
  const auto paths = oracle_simulate(trio(), 2.0, 0.3);
  const auto exact = simulate(trio(), 2.0);
  for (std::size_t k = 0; k < paths.times.size(); ++k)
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_NEAR(paths.positions[k][i], exact.position_at(i, paths.times[k]), 1e-14);
  // Collision at t = 1 sits at fraction 1/3 of the step [0.9, 1.2]: the
  // interpolant of particle 1 runs from 0.9 to 1.1, giving 1 - 2/3 error 1/30.
  EXPECT_NEAR(compare_oracle(trio(), 2.0, 0.3, 1.0).worst_residual, 1.0 / 30.0, 1e-14);
}

TEST(Oracle, HalvingStrictlyDecreasesWithCollisions) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = random_instance(seed, 6);
    if (simulate(inst.init, inst.t_end).events().empty()) continue;
    const double coarse = compare_oracle(inst.init, inst.t_end, 2e-4, 1.0).worst_residual;
    const double fine = compare_oracle(inst.init, inst.t_end, 1e-4, 1.0).worst_residual;
    EXPECT_LT(fine, coarse) << "seed " << seed;
  }
}

TEST(Oracle, RejectsBadStep) {
  EXPECT_THROW((void)oracle_simulate(trio(), 1.0, 0.0), InvalidInput);
  EXPECT_THROW((void)oracle_simulate(trio(), 1.0, -1e-3), InvalidInput);
}

TEST(Report, AggregationKeepsFirstWorstWitness) {
  VerificationReport total;
  VerificationReport a("x", 1.0), b("x", 1.0), c("x", 1.0);
  a.instances = b.instances = c.instances = 1;
  a.observe(0.5, {1}, {0.1});
  b.observe(2.0, {2}, {0.2});
  c.observe(2.0, {3}, {0.3});
  for (auto* r : {&a, &b, &c}) {
    r->finish();
    total.absorb(*r);
  }
  EXPECT_EQ(total.instances, 3u);
  EXPECT_EQ(total.worst_residual, 2.0);
  EXPECT_EQ(total.witness.indices, (std::vector<std::size_t>{2}));
  EXPECT_FALSE(total.pass);
}

TEST(Report, NanNeverPasses) {
  VerificationReport r("x", 1.0);
  r.observe(0.0, {}, {});
  r.observe(std::nan(""), {}, {});
  r.finish();
  EXPECT_FALSE(r.pass);
}

TEST(Suite, UnknownCheckThrows) {
  SuiteConfig cfg;
  cfg.checks = {"qspp", "nonsense"};
  EXPECT_THROW((void)run_suite(cfg), InvalidInput);
}

TEST(Suite, DeterministicAndThreadIndependent) {
  SuiteConfig cfg;
  cfg.seed = 42;
  cfg.instances = 6;
  cfg.n = 25;
  cfg.weak_tests = 3;
  cfg.threads = 1;
  const auto one = run_suite(cfg);
  cfg.threads = 4;
  const auto four = run_suite(cfg);
  const auto again = run_suite(cfg);
  ASSERT_EQ(one.size(), known_checks().size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].name, known_checks()[k]);
    EXPECT_EQ(one[k].instances, 6u);
    EXPECT_TRUE(one[k].pass) << one[k].name << " " << one[k].worst_residual;
    for (const auto* other : {&four, &again}) {
      EXPECT_EQ(one[k].worst_residual, (*other)[k].worst_residual);
      EXPECT_EQ(one[k].witness.seed, (*other)[k].witness.seed);
      EXPECT_EQ(one[k].witness.indices, (*other)[k].witness.indices);
      EXPECT_EQ(one[k].witness.times, (*other)[k].witness.times);
    }
  }
}

TEST(Suite, ToleranceOverrideFlipsVerdict) {
  SuiteConfig cfg;
  cfg.seed = 7;
  cfg.instances = 2;
  cfg.n = 20;
  cfg.checks = {"weak-mass"};
  cfg.weak_tests = 4;
  cfg.order = 4;  // coarse on purpose
  const auto loose = run_suite(cfg);
  ASSERT_GT(loose[0].worst_residual, 0.0);
  cfg.tol = loose[0].worst_residual / 2.0;
  EXPECT_FALSE(run_suite(cfg)[0].pass);
}

// Property: every estimate holds on seeded instances of several sizes.
class EstimateProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(EstimateProperty, AllChecksPass) {
  const std::uint64_t seed = GetParam();
  const std::size_t n = 2 + seed * 7 % 60;
  const auto inst = random_instance(seed, n, 1.0 + static_cast<double>(seed % 4));
  const auto traj = simulate(inst.init, inst.t_end);
  SuiteConfig cfg;
  cfg.weak_tests = 4;
  for (const auto& r : run_checks(traj, cfg, seed))
    EXPECT_TRUE(r.pass) << r.name << " seed " << seed << " residual " << r.worst_residual;
}

INSTANTIATE_TEST_SUITE_P(Seeds, EstimateProperty, ::testing::Range<std::uint64_t>(1, 31));

}  // namespace
