#pragma once
// Deterministic random fixtures shared by the self-test command and the test
// suites: smooth compactly supported (function, one-form) pairs and smooth
// inflow boundary data vanishing at grazing directions. Identical seeds give
// identical fields at every grid size.

#include <cstdint>

#include "grt/grid.hpp"
#include "grt/sphere_bundle.hpp"

namespace grt::testing {

// Low-degree complex polynomials times the rim-flat taper (1 - r^2/R^2)^2 in
// each slot, drawn from a seeded generator.
PairField random_pair(const SpatialGrid& g, uint64_t seed);

// Smooth data on the inflow boundary, weighted by the entry cosine so it
// vanishes at the tangential edges.
BoundaryField random_inflow_data(const BoundaryGrid& bg, uint64_t seed);

}  // namespace grt::testing
