#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "sticky/dynamics.hpp"
#include "sticky/random.hpp"
#include "sticky/verification.hpp"

namespace {

using namespace sticky;
using sticky::testing::trio;
using sticky::testing::single;
using sticky::testing::symmetric_triple;

TEST(Simulate, TrioSingleEvent) {
  const auto traj = simulate(trio(), 3.0);
  ASSERT_EQ(traj.events().size(), 1u);
  const auto& e = traj.events()[0];
  EXPECT_DOUBLE_EQ(e.time, 1.0);
  EXPECT_DOUBLE_EQ(e.position, 1.0);
  EXPECT_EQ(e.merged, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(traj.clusters()[e.result].lo, 0u);
  EXPECT_EQ(traj.clusters()[e.result].hi, 1u);
}

TEST(Simulate, TrioPaths) {
  const auto traj = simulate(trio(), 3.0);
  for (double t : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double g1 = t <= 1.0 ? t : 1.0 + 0.5 * (t - 1.0);
    EXPECT_NEAR(traj.position_at(0, t), g1, 1e-15) << t;
    EXPECT_NEAR(traj.position_at(2, t), 2.0 + t, 1e-15) << t;
  }
  EXPECT_DOUBLE_EQ(traj.position_at(0, 2.0), 1.5);
  EXPECT_DOUBLE_EQ(traj.position_at(2, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(traj.position_at(1, 0.0), 1.0);
}

TEST(Simulate, TrioOneSidedVelocities) {
  const auto traj = simulate(trio(), 3.0);
  EXPECT_DOUBLE_EQ(traj.velocity_at(0, 1.0, Side::right), 0.5);
  EXPECT_DOUBLE_EQ(traj.velocity_at(0, 1.0, Side::left), 1.0);
  EXPECT_DOUBLE_EQ(traj.velocity_at(1, 1.0, Side::right), 0.5);
  EXPECT_DOUBLE_EQ(traj.velocity_at(1, 1.0, Side::left), 0.0);
  EXPECT_EQ(traj.velocity_at(2, 1.7, Side::left), traj.velocity_at(2, 1.7, Side::right));
  EXPECT_EQ(traj.velocity_at(0, 0.5, Side::left), traj.velocity_at(0, 0.5, Side::right));
}

TEST(Simulate, TrioMomentumAndEnergy) {
  const auto traj = simulate(trio(), 3.0);
  EXPECT_NEAR(traj.total_momentum(0.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(traj.total_momentum(2.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(traj.kinetic_energy(0.5), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(traj.kinetic_energy(1.0), 0.25, 1e-15);
  EXPECT_NEAR(traj.kinetic_energy(2.5), 0.25, 1e-15);
}

TEST(Simulate, SingleParticleFreeFlight) {
  const auto traj = simulate(single(-0.75), 4.0);
  EXPECT_TRUE(traj.events().empty());
  for (double t : {0.0, 1.0, 4.0}) EXPECT_DOUBLE_EQ(traj.position_at(0, t), -0.75 * t);
  EXPECT_DOUBLE_EQ(traj.total_momentum(2.0), -0.75);
  EXPECT_DOUBLE_EQ(traj.kinetic_energy(0.0), traj.kinetic_energy(4.0));
}

TEST(Simulate, SymmetricTripleMerge) {
  const auto traj = simulate(symmetric_triple(), 2.0);
  ASSERT_EQ(traj.events().size(), 1u);
  EXPECT_DOUBLE_EQ(traj.events()[0].time, 1.0);
  EXPECT_NEAR(traj.events()[0].position, 0.0, 1e-16);
  EXPECT_EQ(traj.events()[0].merged.size(), 3u);
  EXPECT_NEAR(traj.velocity_at(1, 1.5, Side::right), 0.0, 1e-16);
  EXPECT_NEAR(traj.total_momentum(0.3), 0.0, 1e-16);
  EXPECT_NEAR(traj.total_momentum(1.5), 0.0, 1e-16);
  EXPECT_NEAR(traj.kinetic_energy(1.5), 0.0, 1e-30);
}

TEST(Simulate, NearTieMergesAsOneEvent) {
  // Both pairs meet at t = 1/3, x = 0.1, but the computed times differ in the last bits.
  const ParticleInit init({0.25, 0.5, 0.25}, {0.0, 0.1, 0.3}, {0.3, 0.0, -0.6});
  const auto traj = simulate(init, 1.0);
  ASSERT_EQ(traj.events().size(), 1u);
  EXPECT_EQ(traj.events()[0].merged.size(), 3u);
  EXPECT_NEAR(traj.events()[0].time, 1.0 / 3.0, 1e-12);
}

TEST(Simulate, SimultaneousDistinctPointsAreSeparateEvents) {
  const ParticleInit init({0.25, 0.25, 0.25, 0.25}, {0.0, 1.0, 5.0, 6.0}, {1.0, 0.0, 1.0, 0.0});
  const auto traj = simulate(init, 2.0);
  ASSERT_EQ(traj.events().size(), 2u);
  EXPECT_DOUBLE_EQ(traj.events()[0].time, 1.0);
  EXPECT_DOUBLE_EQ(traj.events()[1].time, 1.0);
  EXPECT_LT(traj.events()[0].position, traj.events()[1].position);
}

TEST(Simulate, SortsInputByPosition) {
  const ParticleInit init({0.5, 0.5}, {1.0, 0.0}, {0.0, 1.0});
  EXPECT_EQ(init.positions()[0], 0.0);
  EXPECT_EQ(init.velocities()[0], 1.0);
  const auto traj = simulate(init, 2.0);
  EXPECT_EQ(traj.events().size(), 1u);
  EXPECT_DOUBLE_EQ(traj.position_at(0, 2.0), 1.5);
}

TEST(Simulate, TruncatesAtTEnd) {
  const auto traj = simulate(trio(), 0.5);
  EXPECT_TRUE(traj.events().empty());
  const auto ks = traj.breakpoints(0);
  ASSERT_EQ(ks.size(), 2u);
  EXPECT_EQ(ks.back().x, 0.5);
  EXPECT_EQ(ks.back().value, 0.5);
  const auto at_zero = simulate(trio(), 0.0);
  EXPECT_EQ(at_zero.breakpoints(2).size(), 1u);
  EXPECT_DOUBLE_EQ(at_zero.trajectory(2)(0.0), 2.0);
}

TEST(Simulate, BreakpointsOfMergedParticle) {
  const auto traj = simulate(trio(), 3.0);
  const auto ks = traj.breakpoints(1);
  ASSERT_EQ(ks.size(), 3u);
  EXPECT_EQ(ks[1].x, 1.0);
  EXPECT_EQ(ks[1].value, 1.0);
  EXPECT_EQ(ks[2].x, 3.0);
  EXPECT_EQ(ks[2].value, 2.0);
  const auto path = traj.trajectory(1);
  EXPECT_DOUBLE_EQ(path(0.5), 1.0);
  EXPECT_DOUBLE_EQ(path(2.0), 1.5);
}

TEST(Simulate, InputErrors) {
  EXPECT_THROW(ParticleInit({}, {}, {}), InvalidInput);
  EXPECT_THROW(ParticleInit({0.5, 0.5}, {0.0, 0.0}, {1.0, 0.0}), InvalidInput);
  EXPECT_THROW(ParticleInit({0.5, 0.5}, {0.0, NAN}, {1.0, 0.0}), InvalidInput);
  EXPECT_THROW(ParticleInit({0.5, 0.5}, {0.0, 1.0}, {INFINITY, 0.0}), InvalidInput);
  EXPECT_THROW(ParticleInit({1.5, -0.5}, {0.0, 1.0}, {1.0, 0.0}), InvalidInput);
  EXPECT_THROW(ParticleInit({0.5, 0.4}, {0.0, 1.0}, {1.0, 0.0}), InvalidInput);
  EXPECT_THROW(ParticleInit({0.5, 0.5}, {0.0}, {1.0, 0.0}), InvalidInput);
  EXPECT_THROW((void)simulate(trio(), -1.0), InvalidInput);
  EXPECT_THROW((void)simulate(trio(), NAN), InvalidInput);
}

TEST(Simulate, RangeErrors) {
  const auto traj = simulate(trio(), 2.0);
  EXPECT_THROW((void)traj.position_at(0, 2.5), RangeError);
  EXPECT_THROW((void)traj.position_at(0, -0.1), RangeError);
  EXPECT_THROW((void)traj.position_at(3, 1.0), RangeError);
  EXPECT_THROW((void)traj.velocity_at(0, 0.0, Side::left), RangeError);
  EXPECT_THROW((void)traj.total_momentum(3.0), RangeError);
  EXPECT_THROW((void)traj.kinetic_energy(-1.0), RangeError);
}

// --- Properties over seeded random instances ---------------------------------

class RandomInstances : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomInstances, TrajectoryInvariants) {
  const auto inst = random_instance(GetParam(), 0, 2.0);
  const auto traj = simulate(inst.init, inst.t_end);
  const std::size_t n = traj.size();
  EXPECT_LE(traj.events().size() + 1, n);

  for (std::size_t k = 1; k < traj.events().size(); ++k)
    EXPECT_LE(traj.events()[k - 1].time, traj.events()[k].time);

  // Merge rule: mass adds up, velocity is the mass-weighted mean.
  for (const auto& e : traj.events()) {
    const Cluster& r = traj.clusters()[e.result];
    double m = 0.0, p = 0.0;
    for (std::size_t c : e.merged) {
      m += traj.clusters()[c].mass;
      p += traj.clusters()[c].mass * traj.clusters()[c].velocity;
      EXPECT_EQ(traj.clusters()[c].died, e.time);
    }
    EXPECT_NEAR(r.mass, m, 1e-15);
    EXPECT_NEAR(r.velocity, p / m, 1e-13);
    double members = 0.0;
    for (std::size_t i = r.lo; i <= r.hi; ++i) members += inst.init.masses()[i];
    EXPECT_NEAR(r.mass, members, 1e-14);
  }

  Rng rng(GetParam() + 1000);
  std::vector<double> ts{0.0, inst.t_end};
  for (int k = 0; k < 100; ++k) ts.push_back(rng.uniform(0.0, inst.t_end));
  for (double t : traj.event_times()) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  const double p0 = traj.total_momentum(0.0);
  double e_prev = traj.kinetic_energy(0.0);
  std::vector<char> joined(n, 0);
  for (double t : ts) {
    const auto xs = traj.positions_at(t);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      EXPECT_LE(xs[i], xs[i + 1]) << "order at t=" << t;
      if (joined[i]) {
        EXPECT_EQ(xs[i], xs[i + 1]) << "stickiness at t=" << t;
      }
      if (xs[i] == xs[i + 1]) joined[i] = 1;
    }
    EXPECT_LE(std::abs(traj.total_momentum(t) - p0), 1e-12 * (1.0 + std::abs(p0)));
    const double e = traj.kinetic_energy(t);
    EXPECT_LE(e, e_prev + 1e-12);
    e_prev = e;
  }
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(traj.position_at(i, 0.0), inst.init.positions()[i]);
    EXPECT_EQ(traj.velocity_at(i, 0.0, Side::right), inst.init.velocities()[i]);
  }
}

TEST_P(RandomInstances, Deterministic) {
  const auto inst = random_instance(GetParam(), 40, 2.0);
  const auto a = simulate(inst.init, inst.t_end);
  const auto b = simulate(inst.init, inst.t_end);
  ASSERT_EQ(a.events().size(), b.events().size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ka = a.breakpoints(i), kb = b.breakpoints(i);
    ASSERT_EQ(ka.size(), kb.size());
    for (std::size_t k = 0; k < ka.size(); ++k) {
      EXPECT_EQ(ka[k].x, kb[k].x);
      EXPECT_EQ(ka[k].value, kb[k].value);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomInstances, ::testing::Range<std::uint64_t>(1, 41));

TEST(Simulate, AgreesWithSmallStepOracle) {
  const auto inst = random_instance(5, 5, 2.0);
  const auto traj = simulate(inst.init, 2.0);
  const double dt = std::ldexp(1.0, -22);
  const auto paths = oracle_simulate(inst.init, 2.0, dt);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    ASSERT_EQ(paths.times[k], t);
    const auto xs = traj.positions_at(t);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(xs[i], paths.positions[k][i], 1e-6) << "t=" << t;
  }
}

}  // namespace
