#pragma once
// Inversion of the ray transforms. Three inverters for the unattenuated
// transform of a function — the fiberwise-projection scheme that is exact on
// constant-curvature discs, its series-corrected extension for perturbed
// metrics, and a matrix-free least-squares solver for (function, solenoidal
// one-form) pairs — plus the seven-step attenuated reconstruction that
// composes them with the holomorphic integrating factors.

#include <vector>

#include "grt/common.hpp"
#include "grt/geometry.hpp"
#include "grt/grid.hpp"
#include "grt/holomorphic.hpp"
#include "grt/metric.hpp"
#include "grt/sphere_bundle.hpp"
#include "grt/transport.hpp"

namespace grt {

// Which inverter recovers the function part of the ray-transform data inside
// the reconstruction (and in the cross-backend comparisons).
enum class I0Backend { ExplicitCC, FredholmW2, LeastSquares };

const char* to_string(I0Backend b);

struct ReconstructionConfig {
  I0Backend i0_backend = I0Backend::LeastSquares;
  // true: single-factor path, output is the real part (real data assumed);
  // false: runs both factor signs and combines their projections.
  bool real_valued = true;
  int ntheta = 0;  // fiber resolution of internal bundle fields; 0 matches the boundary grid
  double cgls_tol = 1e-6;          // relative normal-equation residual target
  int cgls_max_iterations = 60;
  double neumann_tol = 1e-10;      // stopping for the factor / correction series
  int neumann_max_terms = 50;
  double fd_delta = 0.0;           // flow-difference offset; 0 picks the grid step
  TraceOptions trace{};
};

// Per-stage measurements so a bad reconstruction is attributable to a stage.
struct ReconstructionDiagnostics {
  int factor_terms = 0;                 // series length of the integrating factor
  double factor_wrong_frequency = 0;    // spectral one-sidedness defect of w
  double v_wrong_frequency = 0;         // one-sidedness defect of the recomposed solution part
  int cgls_iterations = 0;
  double cgls_normal_residual = 0;      // relative normal-equation residual at exit
  double cgls_data_residual = 0;        // relative data misfit at exit
  double uhat_mean_norm = 0;            // norm of the fiber mean after subtraction
  double q_angular_spread = 0;          // RMS fiber deviation of q before averaging
  long interpolation_clamps = 0;        // grazing-direction clamps in boundary reads
};

struct ReconstructionResult {
  CScalarField f;
  ReconstructionDiagnostics diagnostics;
};

struct PairInversion {
  CScalarField phi;      // function part
  CScalarField q;        // stream potential of the one-form part, zero on the rim
  OneFormField alpha;    // the divergence-free one-form itself
  int iterations = 0;
  double normal_residual = 0;  // relative normal-equation residual at exit
  double data_residual = 0;    // relative data misfit at exit
};

struct SeriesInversion {
  CScalarField f;
  int terms = 0;                    // series terms accumulated (first = raw scheme output)
  std::vector<double> increments;   // relative norm of each correction term
};

// Measurement record of a transported solution that ought to be spectrally
// one-sided; the trend over a refinement sweep is the caller's to assemble.
struct HolomorphicityCheck {
  double wrong_frequency = 0;  // relative energy in the wrong-signed fiber modes
  double fiber_energy = 0;     // norm of the fiber-dependent part (scale witness)
};

// Recovers f from data = (ray transform of f) on the inflow boundary by the
// fiberwise projection scheme: zero-extend, take the fiberwise odd part, apply
// (Id + iH), spread the imaginary part along rays (it is a first integral when
// the curvature is constant), recover the real part fiberwise, and average the
// flow derivative. Valid on constant-curvature metrics only.
CScalarField invert_i0_explicit(const MetricModel& m, const BoundaryField& data,
                                const SpatialGrid& grid, int ntheta,
                                const SMRayTable* rays, const TraceOptions& opt);

// Perturbed-metric variant: the projection scheme applied to the data returns
// g = f + (fiber-average correction applied twice); the correction is removed
// by an alternating series, one pair of transport solves per term.
SeriesInversion invert_i0_fredholm(const MetricModel& m, const BoundaryField& data,
                                   const SpatialGrid& grid, int ntheta,
                                   const SMRayTable* rays, const TraceOptions& opt,
                                   int max_terms = 30, double tol = 1e-8);

// Least-squares inversion of pair data: the unknown one-form is parametrized
// as the rotated gradient of a stream potential vanishing on the rim (every
// divergence-free form on the disc is of that shape), and the normal equations
// of the inflow-weighted misfit are solved by conjugate gradients with the
// ray-transform forward map and its weighted backprojection.
PairInversion invert_i0_pairs(const MetricModel& m, const BoundaryField& data,
                              const SpatialGrid& grid, int ntheta,
                              const SMRayTable* rays, const TraceOptions& opt,
                              double tol = 1e-6, int max_iterations = 60);

// Seven-step reconstruction of f from an attenuated sinogram: zero-extend,
// build the integrating factor(s), project the conjugated data fiberwise,
// recover the antiholomorphic part of the conjugated transport solution from
// its boundary jump (one pair inversion plus an exit-point read), recombine,
// recover the fiber mean from the boundary trace and an odd transport solve,
// and average the damped flow derivative. The spatial grid is taken from a.
ReconstructionResult reconstruct_attenuated(const MetricModel& m, const CScalarField& a,
                                            const BoundaryField& sinogram,
                                            const ReconstructionConfig& config);

// Builds the transported solution whose right-hand side is spectrally
// one-sided by construction — the conjugated gauge pair e^{-w}(a p + dp(xi))
// with p vanishing on the rim, whose transform vanishes identically, so the
// solution vanishes on the whole boundary and must itself be one-sided — and
// measures how far the computed solution is from that prediction. For
// function-only right-hand sides the vanishing-data hypothesis forces f = 0
// (the transform is injective), so the gauge pair is the nontrivial testable
// instance.
HolomorphicityCheck verify_holomorphic_solution(const MetricModel& m, const CScalarField& a,
                                                const CScalarField& p, int ntheta,
                                                const TraceOptions& opt,
                                                double interior_frac = 1.0);

}  // namespace grt
