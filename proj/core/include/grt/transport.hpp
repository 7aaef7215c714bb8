#pragma once
// Transport equations along the geodesic flow and the weighted/attenuated ray
// transforms built on them: forward projections onto the inflow boundary,
// per-node transport solutions, boundary-value spreading into the bundle, the
// weighted backprojection (the transform adjoint in the pair pairing), the
// attenuated normal operator, and the solenoidal (Hodge) decomposition of
// one-form components.

#include <functional>
#include <utility>
#include <vector>

#include "grt/common.hpp"
#include "grt/geometry.hpp"
#include "grt/grid.hpp"
#include "grt/metric.hpp"
#include "grt/sphere_bundle.hpp"

namespace grt {

// Pointwise integrand on the bundle, sampled along traced rays.
using BundleFn = std::function<cplx(double x, double y, double theta)>;

// Bundle integrand of a (function, one-form) pair:
//   F(x, xi) = f(x) + alpha_j(x) xi^j,  xi = c^{-1/2} (cos theta, sin theta).
BundleFn pair_integrand(const MetricModel& m, const PairField& F);

// Bundle integrand interpolating a sampled field (spatial bicubic, angular
// cubic on the upsampled fiber grid).
BundleFn field_integrand(const BundleField& F);

// Spatial-only integrand (bicubic; zero outside the disc).
BundleFn scalar_integrand(const MetricModel& m, const CScalarField& a);

// --- ray integrals onto the inflow boundary ------------------------------------

// General weighted/attenuated ray integral on every inflow node of bg:
//   (j,k) -> integral_0^tau w(phi_t) exp(integral_0^t a(phi_s) ds) src(phi_t) dt
// with trapezoid sums on the RK4 samples and the exact clipped last interval.
// Null att means no attenuation, null weight means w = 1. Outflow nodes are 0.
BoundaryField forward_rays(const MetricModel& m, const BoundaryGrid& bg,
                           const TraceOptions& opt, const BundleFn& src,
                           const BundleFn* att = nullptr,
                           const BundleFn* weight = nullptr);

// Attenuated ray transform of a sampled bundle source.
BoundaryField forward_attenuated(const MetricModel& m, const CScalarField* a,
                                 const BundleField& F, const BoundaryGrid& bg,
                                 const TraceOptions& opt);

// Attenuated ray transform of a (function, one-form) pair.
BoundaryField forward_attenuated(const MetricModel& m, const CScalarField* a,
                                 const PairField& F, const BoundaryGrid& bg,
                                 const TraceOptions& opt);

// Weight-attenuated transform: integral of rho * F along rays.
BoundaryField forward_weighted(const MetricModel& m, const BundleField& rho,
                               const BundleField& F, const BoundaryGrid& bg,
                               const TraceOptions& opt);

// --- transport solutions on the bundle ------------------------------------------

// u(x, xi) = integral to the forward exit of src along the geodesic from
// (x, xi); vanishes on the outflow boundary by construction. One forward trace
// per interior bundle node.
BundleField transport_solve(const MetricModel& m, const SpatialGrid& g, int ntheta,
                            const BundleFn& src, const TraceOptions& opt);

// Convenience: transport solution whose source is a sampled bundle field.
BundleField u_transport(const BundleField& F, const TraceOptions& opt);

// First-integral extension of inflow data: value at (x, xi) is w at the entry
// point of the geodesic through (x, xi), read in (phi, psi) coordinates with
// bilinear interpolation (edge rows clamped and counted). Constant along the
// flow, so  H u = 0  up to discretization. A ray table avoids the per-node
// backward traces; clamp_count (optional) receives the interpolant clamps.
BundleField w_psi(const MetricModel& m, const BoundaryField& w, const SpatialGrid& g,
                  int ntheta, const SMRayTable* rays, const TraceOptions& opt,
                  long* clamp_count = nullptr);

// Higher-order first-integral extension for boundary data that is smooth on
// the full (phi, theta) torus (e.g. transforms of interior-supported sources,
// which vanish near grazing): trigonometric upsampling of the torus followed
// by periodic bicubic reads at the entry point of each bundle node. Same
// contract as w_psi otherwise; prefer w_psi for data with jumps at the
// inflow/outflow interface.
BundleField spread_first_integral(const MetricModel& m, const BoundaryField& w,
                                  const SpatialGrid& g, int ntheta,
                                  const SMRayTable* rays, const TraceOptions& opt,
                                  int upsample = 4);

// Even continuation of inflow data to the full boundary bundle: outflow nodes
// take the value at the backward-scattered entry point, making the result
// invariant under the scattering involution.
BoundaryField even_continuation(const MetricModel& m, const BoundaryField& w,
                                const TraceOptions& opt);

// --- adjoint, normal operator ----------------------------------------------------

// Adjoint of forward_weighted in the pairing
//   <(f, alpha), (f', alpha')> = integral_M [ f conj(f') + c^{-1} alpha_j conj(alpha'_j) ] c dx
// against the mu-weighted inflow product: fiber moments of conj(rho) times the
// first-integral spreading of g.
PairField adjoint_weighted(const MetricModel& m, const BundleField& rho,
                           const BoundaryField& g, const SpatialGrid& grid,
                           const SMRayTable* rays, const TraceOptions& opt,
                           long* clamp_count = nullptr);

// N^a F = (I^a)* I^a F, realized as the weighted adjoint of the exponentially
// rescaled data with weight rho = exp(-u^a); ntheta is the fiber resolution of
// the intermediate transport solve and moment sums.
PairField normal_operator(const MetricModel& m, const CScalarField& a,
                          const PairField& F, const BoundaryGrid& bg, int ntheta,
                          const SMRayTable* rays, const TraceOptions& opt);

// --- inner products ---------------------------------------------------------------

// L^2 pairing of (function, one-form) pairs over the disc (see adjoint_weighted).
cplx pair_inner_product(const MetricModel& m, const PairField& a, const PairField& b);
double pair_norm(const MetricModel& m, const PairField& a);

// Scalar L^2 pairing over the disc with the metric area weight.
cplx scalar_inner_product(const MetricModel& m, const CScalarField& a,
                          const CScalarField& b);
double scalar_norm(const MetricModel& m, const CScalarField& a);

// mu-weighted inflow pairing: integral over the inflow bundle of u conj(v)
// cos(psi) with the boundary length element.
cplx inflow_inner_product(const MetricModel& m, const BoundaryField& u,
                          const BoundaryField& v);

// --- solenoidal decomposition ------------------------------------------------------

struct SolenoidalResult {
  OneFormField alpha_s;  // divergence-free part
  CScalarField p;        // potential, zero on the rim
  int iterations = 0;    // Krylov iterations of the Poisson solve
  double residual = 0;   // final relative residual
};

// alpha = alpha_s + d p with p|_rim = 0 and delta alpha_s = 0; the conformal
// factor drops out, so p solves the Euclidean Dirichlet problem
// Laplace p = div alpha discretized with boundary-fitted (shortened) arms.
SolenoidalResult solenoidal_decompose(const MetricModel& m, const OneFormField& alpha,
                                      double tol = 1e-10, int max_iterations = 20000);

// Chart divergence with the same masked stencils used by the decomposition;
// the codifferential is  delta alpha = -e^{-2 lambda} (chart divergence).
CScalarField chart_divergence(const OneFormField& alpha);

// Dirichlet Poisson solve  Laplace u = rhs  on the disc grid (boundary-fitted
// five-point stencil, BiCGStab); returns iterations via the result struct of
// the caller. Exposed for the decomposition's tests.
struct PoissonResult {
  std::vector<double> u;
  int iterations = 0;
  double residual = 0;
};
PoissonResult poisson_dirichlet(const SpatialGrid& g, const std::vector<double>& rhs,
                                double tol, int max_iterations);

}  // namespace grt
