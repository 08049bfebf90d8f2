#pragma once

#include <vector>

#include "sticky/dynamics.hpp"

namespace sticky::testing {

// Three equal masses at 0, 1, 2 with velocities 1, 0, 1: the first two merge
// at (t, x) = (1, 1) and the third runs away.
inline ParticleInit trio() {
  const double third = 1.0 / 3.0;
  return ParticleInit({third, third, 1.0 - 2.0 * third}, {0.0, 1.0, 2.0}, {1.0, 0.0, 1.0});
}

// Equal masses at -1, 0, 1 converging on the origin at t = 1.
inline ParticleInit symmetric_triple() {
  const double third = 1.0 / 3.0;
  return ParticleInit({third, third, 1.0 - 2.0 * third}, {-1.0, 0.0, 1.0}, {1.0, 0.0, -1.0});
}

inline ParticleInit single(double v) { return ParticleInit({1.0}, {0.0}, {v}); }

}  // namespace sticky::testing
