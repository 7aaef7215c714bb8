#pragma once
// Analytic test fields: compactly supported scalar phantoms (Gaussian mixtures
// and polynomial bumps), boundary-flat potentials, and the matched
// function/1-form pairs (a*p, dp) that every attenuated ray transform maps to
// zero. All shapes vanish smoothly before the rim so ray integrals only ever
// see interior-supported integrands.

#include <vector>

#include "grt/grid.hpp"
#include "grt/metric.hpp"

namespace grt {

// One additive phantom term.
//
//   Gaussian: A exp(-|x - c|^2 / (2 width^2)) * taper(x)
//   Bump:     A (1 - |x - c|^2 / width^2)_+^power * taper(x)
//
// where taper(x) = (1 - |x|^2 / cutoff^2)_+^2 about the origin enforces
// compact support strictly inside the disc; cutoff <= 0 disables it (only
// sensible for terms that already vanish before the rim).
struct PhantomTerm {
  enum class Kind { Gaussian, Bump };
  Kind kind = Kind::Gaussian;
  double cx = 0.0, cy = 0.0;  // center
  double width = 0.2;         // Gaussian sigma, or bump support radius
  double amplitude = 1.0;     // real part of the amplitude
  double amplitude_im = 0.0;  // imaginary part of the amplitude
  double cutoff = 0.8;        // support radius of the origin-centered taper
  int power = 2;              // bump exponent
};

cplx phantom_value(const PhantomTerm& t, double x, double y);

CScalarField render_phantom(const std::vector<PhantomTerm>& terms, const SpatialGrid& g);

// Fixed catalog of smooth interior-supported phantoms for self-test and
// acceptance sweeps; index is taken modulo the catalog size. Index 0 is the
// reference Gaussian at (0.2, 0.1), sigma 0.15, support |x| <= 0.8 (on the
// unit disc; shapes scale with the grid radius when rendered).
PhantomTerm catalog_phantom(int index);

// Potential vanishing to second order at the rim: p = scale * (1 - r^2/R^2)^2,
// with the closed-form chart differential dp = -4 scale (1 - r^2/R^2) (x, y) / R^2.
CScalarField polynomial_potential(const SpatialGrid& g, double scale = 1.0);
OneFormField polynomial_potential_differential(const SpatialGrid& g, double scale = 1.0);

// Matched pair (a*p, dp). With dp supplied use the analytic differential;
// otherwise dp is computed by one-sided-safe finite differences on the disc.
PairField gauge_pair(const CScalarField& a, const CScalarField& p);
PairField gauge_pair(const CScalarField& a, const CScalarField& p, const OneFormField& dp);

}  // namespace grt
