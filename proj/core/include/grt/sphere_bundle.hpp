#pragma once
// Complex fields on the unit sphere bundle of the disc and on the boundary
// circle bundle, their angular Fourier calculus (fiberwise Hilbert transform,
// parity split, holomorphic projections), interpolation, and the derivatives
// along the geodesic flow and its perpendicular companion.

#include <functional>
#include <vector>

#include "grt/common.hpp"
#include "grt/geometry.hpp"
#include "grt/grid.hpp"
#include "grt/metric.hpp"

namespace grt {

// --- field containers --------------------------------------------------------

// Values indexed by (spatial node, angle node), fiber-contiguous; zero outside
// the disc. The angle grid is theta_k = 2 pi k / ntheta.
struct BundleField {
  SpatialGrid grid;
  int ntheta = 0;
  MetricModel metric;
  std::vector<cplx> v;

  BundleField() = default;
  BundleField(const SpatialGrid& g, int nth, const MetricModel& m)
      : grid(g), ntheta(nth), metric(m), v((size_t)g.size() * nth, cplx{}) {
    if (nth < 8 || (nth & (nth - 1)) != 0)
      throw error(errc::config, "angular resolution must be a power of two >= 8");
  }

  cplx& at(int spatial, int k) { return v[(size_t)spatial * ntheta + k]; }
  const cplx& at(int spatial, int k) const { return v[(size_t)spatial * ntheta + k]; }
  double theta(int k) const { return two_pi * k / ntheta; }
};

// Values indexed by (boundary node, direction node) over the full circle of
// directions; data fields keep zeros on outflow nodes.
struct BoundaryField {
  BoundaryGrid bgrid;
  std::vector<cplx> v;

  BoundaryField() = default;
  explicit BoundaryField(const BoundaryGrid& bg) : bgrid(bg), v(bg.size(), cplx{}) {}

  cplx& at(int j, int k) { return v[bgrid.idx(j, k)]; }
  const cplx& at(int j, int k) const { return v[bgrid.idx(j, k)]; }
};

BundleField make_bundle_field(const SpatialGrid& g, int ntheta, const MetricModel& m,
                              const std::function<cplx(double, double, double)>& f);
BoundaryField make_boundary_field(const BoundaryGrid& bg,
                                  const std::function<cplx(const BoundaryPoint&)>& f,
                                  bool inflow_only);

// --- angular Fourier calculus -------------------------------------------------

// Fourier-series coefficients per node: u(x, theta) = sum_k c_k(x) e^{i k theta},
// k the signed bin index; same layout as the field it came from.
struct AngularCoeffs {
  int ntheta = 0;
  int rows = 0;
  std::vector<cplx> c;

  cplx& at(int row, int bin) { return c[(size_t)row * ntheta + bin]; }
  const cplx& at(int row, int bin) const { return c[(size_t)row * ntheta + bin]; }
};

AngularCoeffs angular_fourier(const BundleField& u);
AngularCoeffs angular_fourier(const BoundaryField& u);
BundleField angular_fourier_inverse(const AngularCoeffs& c, const BundleField& like);
BoundaryField angular_fourier_inverse(const AngularCoeffs& c, const BoundaryField& like);

// Fiberwise Hilbert transform: coefficient k multiplied by -i sgn(k), with
// sgn(0) = 0 and the unresolved Nyquist bin k = -ntheta/2 zeroed.
BundleField hilbert(const BundleField& u);
BoundaryField hilbert(const BoundaryField& u);

// (Id + i * sign * H): for sign=+1 keeps the mean, doubles k>0, kills k<0.
BundleField holo_project(const BundleField& u, int sign);
BoundaryField holo_project(const BoundaryField& u, int sign);

// Even/odd parts under theta -> theta + pi (exact index shift).
std::pair<BundleField, BundleField> parity_split(const BundleField& u);
std::pair<BoundaryField, BoundaryField> parity_split(const BoundaryField& u);

// Angular mean per node.
CScalarField average(const BundleField& u);
std::vector<cplx> average(const BoundaryField& u);

// d/dtheta per fiber, spectral.
BundleField angular_derivative(const BundleField& u);

// --- interpolation -----------------------------------------------------------

// Bicubic in space on ghost-extended slices, cubic in angle on a spectrally
// upsampled fiber grid.
class BundleInterpolant {
public:
  explicit BundleInterpolant(const BundleField& u, int upsample = 2);
  cplx operator()(double x, double y, double theta) const;
  const SpatialGrid& grid() const { return g_; }

private:
  SpatialGrid g_;
  int nf_ = 0;
  std::vector<cplx> v_;  // (spatial, fine angle)
};

// Bilinear interpolation of inflow data in (phi, psi) coordinates. Queries with
// |psi| beyond the outermost inflow nodes are clamped to the edge row and
// counted (grazing-ray handling).
class InflowBilinear {
public:
  explicit InflowBilinear(const BoundaryField& w);
  cplx operator()(double phi, double psi) const;
  long clamps() const { return clamps_; }

private:
  BoundaryGrid bg_;
  std::vector<cplx> v_;  // (phi row j, offset m) with m in [mlo, mhi]
  int mlo_ = 0, mhi_ = 0;
  mutable long clamps_ = 0;
};

// Periodic bicubic interpolation over the whole (phi, theta) torus.
class TorusBicubic {
public:
  explicit TorusBicubic(const BoundaryField& w);
  cplx operator()(double phi, double theta) const;

private:
  BoundaryGrid bg_;
  std::vector<cplx> v_;
};

// Trigonometric upsampling of a boundary field on its (phi, theta) torus by a
// power-of-two factor: 2D zero-padded Fourier resampling, exact on resolved
// modes, both Nyquist lines split symmetrically. Tightens subsequent local
// interpolation without adding information.
BoundaryField upsample_torus(const BoundaryField& w, int factor);

// --- flow-aligned derivatives --------------------------------------------------

// Derivative along the geodesic flow at p by a symmetric (or boundary-clipped,
// still second order) difference of flowed evaluations; delta <= 0 picks the
// spatial grid step.
cplx geodesic_derivative(const BundleField& u, const BundlePoint& p, double delta = 0.0,
                         const TraceOptions& opt = {});

// Same, evaluated at every bundle node. A ray table built on the same
// grid/ntheta caps the flow offsets exactly near the rim; without one a
// conservative distance-to-rim bound is used instead (fine for fields
// supported away from the rim).
BundleField geodesic_derivative_field(const BundleField& u, const SMRayTable* rays,
                                      double delta = 0.0, const TraceOptions& opt = {});

// Derivative along the clockwise-rotated direction, horizontal part:
//   e^-l [ sin(th) u_x - cos(th) u_y + (cos(th) l_x + sin(th) l_y) u_th ].
BundleField perp_derivative_field(const BundleField& u);
cplx perp_derivative(const BundleField& u, const BundlePoint& p);

// --- norms and masks -----------------------------------------------------------

// L2 over the bundle with the Liouville weight c(x) dx dtheta.
double l2_norm(const BundleField& u);
// Max over nodes with |x| <= frac * radius.
double sup_norm_interior(const BundleField& u, double frac = 1.0);
double sup_norm_interior(const CScalarField& f, double frac = 1.0);
// L2 of the inflow data with the entry-cosine weight and rim length element.
double l2_norm_inflow(const BoundaryField& g, const MetricModel& m);
double sup_norm(const BoundaryField& g);

// Relative negative- (sign=+1) or positive- (sign=-1) frequency energy of the
// fibers; the flatness measure for holomorphicity checks. Nyquist counts as
// wrong for either sign.
double wrong_frequency_energy(const BundleField& u, int sign, double interior_frac = 1.0);
double wrong_frequency_energy(const BoundaryField& u, int sign);

namespace testing {
// Fault injection for the self-test negative control: flips the sign of one
// Hilbert multiplier entry until disabled.
void inject_hilbert_fault(bool enabled);
bool hilbert_fault_enabled();
}  // namespace testing

}  // namespace grt
