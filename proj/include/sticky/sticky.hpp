#pragma once

// Umbrella header for the sticky particle library.

#include "sticky/convergence.hpp"
#include "sticky/dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/flow_map.hpp"
#include "sticky/io.hpp"
#include "sticky/measures.hpp"
#include "sticky/piecewise_linear.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/random.hpp"
#include "sticky/verification.hpp"
#include "sticky/weak_solution.hpp"
