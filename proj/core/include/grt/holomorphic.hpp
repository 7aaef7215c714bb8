#pragma once
// Odd (anti)holomorphic integrating factors for the attenuated transport
// equation: the W operator (angular average of the perpendicular derivative of
// a transport solution, identically zero on constant-curvature discs), the S
// map from inflow data, the projected transport solutions Gamma a, and the
// Neumann-series construction of factors w with  H w = -a.

#include <vector>

#include "grt/common.hpp"
#include "grt/geometry.hpp"
#include "grt/grid.hpp"
#include "grt/metric.hpp"
#include "grt/sphere_bundle.hpp"
#include "grt/transport.hpp"

namespace grt {

// W f = ((perp derivative of u^f) averaged over the fiber); u^f is the
// forward-exit transport solution of the spatial source f.
CScalarField w_operator(const MetricModel& m, const CScalarField& f, int ntheta,
                        const TraceOptions& opt);

// Same, reusing an already computed transport solution u = u^f.
CScalarField w_from_u(const BundleField& u);

// S h = ((perp derivative of the first-integral spreading of h) averaged over
// the fiber); h lives on the inflow boundary grid. Its formal adjoint pairs h
// against -(1/2pi) I^0 applied to the rotated gradient of a test function.
CScalarField s_operator(const MetricModel& m, const BoundaryField& h,
                        const SpatialGrid& g, int ntheta, const SMRayTable* rays,
                        const TraceOptions& opt);

// Gamma a = (Id + i sign H)(odd part of u^a): odd by construction, holomorphic
// (sign=+1) or antiholomorphic (sign=-1) up to spectral rounding, and
// H(Gamma a) = -a - i sign W a.
BundleField gamma(const MetricModel& m, const CScalarField& a, int sign, int ntheta,
                  const TraceOptions& opt);

// Same, reusing an already computed transport solution u = u^a.
BundleField gamma_from_u(const BundleField& u, int sign);

struct FactorResult {
  BundleField w;    // odd (anti)holomorphic integrating factor, H w = -a
  CScalarField b;   // Neumann solution of (Id + i sign W) b = a
  int terms = 0;    // series terms summed (1 on constant curvature)
  std::vector<double> increments;  // relative norm of each correction term
};

// Builds the integrating factor by solving (Id + i sign W) b = a with the
// truncated Neumann series b = sum_m (-i sign W)^m a and returning
// w = Gamma(b, sign). Constant-curvature metrics have W identically zero, so
// the series is the single term b = a. The series stops once the correction
// drops below tol (relative to a) or max_terms is reached; it throws
// errc::series_diverged when the corrections stop decreasing above tol.
FactorResult integrating_factor(const MetricModel& m, const CScalarField& a,
                                int sign, int ntheta, const TraceOptions& opt,
                                int max_terms = 50, double tol = 1e-10);

// Interior sup norm of  (H w) + a,  the defining residual of an integrating
// factor; the flow derivative is measured by flow-aligned differencing.
double factor_residual(const MetricModel& m, const BundleField& w,
                       const CScalarField& a, const SMRayTable* rays, double frac,
                       const TraceOptions& opt);

// Relative spectral L2 energy in the wrong-signed angular frequencies
// (negative for sign=+1, positive for sign=-1; the mean is never counted as
// offending), over nodes within frac of the disc radius.
double holomorphicity_report(const BundleField& u, int sign, double frac = 1.0);

// Elementwise exponential of a bundle field (e.g. the conjugating weight e^w).
BundleField exp_field(const BundleField& u);

}  // namespace grt
