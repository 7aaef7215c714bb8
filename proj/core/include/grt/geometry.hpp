#pragma once
// Unit-speed geodesics of the conformal disc metrics: fixed-step RK4 in
// (x, y, theta) with a bracketed false-position solve for the boundary
// crossing, the boundary (phi, psi) parametrization, the scattering relation,
// and precomputed per-node ray tables shared by the transforms.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "grt/common.hpp"
#include "grt/grid.hpp"
#include "grt/metric.hpp"

namespace grt {

// A point of the unit sphere bundle: chart position plus direction angle.
// The represented unit vector is  xi = c(x)^{-1/2} (cos theta, sin theta).
struct BundlePoint {
  double x = 0, y = 0, theta = 0;
};

// Boundary point: position angle phi on the rim, direction angle theta.
struct BoundaryPoint {
  double phi = 0, theta = 0;
};

// Signed angle from the inward normal; in (-pi/2, pi/2) exactly on inflow.
inline double inflow_offset(const BoundaryPoint& b) { return wrap_pi(b.theta - b.phi - pi); }

// Strict inflow: tangential directions count as outflow.
inline bool is_inflow(const BoundaryPoint& b) { return std::cos(b.theta - b.phi) < 0.0; }

inline double santalo_weight(const BoundaryPoint& b) { return std::cos(inflow_offset(b)); }

inline BoundaryPoint boundary_from_psi(double phi, double psi) {
  return {wrap_2pi(phi), wrap_2pi(phi + pi + psi)};
}

inline BundlePoint bundle_from_boundary(double radius, const BoundaryPoint& b) {
  return {radius * std::cos(b.phi), radius * std::sin(b.phi), b.theta};
}

inline BoundaryPoint boundary_from_bundle(const BundlePoint& p) {
  return {wrap_2pi(std::atan2(p.y, p.x)), wrap_2pi(p.theta)};
}

struct TraceOptions {
  double step = 0.01;          // RK4 step in metric time
  double tol_boundary = 1e-10; // |r - R| tolerance at the exit point
  int max_steps = 200000;      // per-ray budget; exceeding it signals trapping
};

struct TraceEnd {
  double tau = 0;     // parameter length until the boundary
  BundlePoint end;    // state at the boundary crossing
  int steps = 0;
};

// One RK4 step of the geodesic system; h may be negative (backward flow).
inline void geodesic_rk4_step(const MetricModel& m, const double s[3], double h,
                              double out[3]) {
  double k1[3], k2[3], k3[3], k4[3], t[3];
  m.geodesic_rhs(s[0], s[1], s[2], k1);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * h * k1[i];
  m.geodesic_rhs(t[0], t[1], t[2], k2);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * h * k2[i];
  m.geodesic_rhs(t[0], t[1], t[2], k3);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + h * k3[i];
  m.geodesic_rhs(t[0], t[1], t[2], k4);
  for (int i = 0; i < 3; ++i)
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Integrate from p until the rim. The visitor is called at every retained
// sample as visit(state, t, dt) where dt is the parameter distance to the
// previous sample (0 for the first call); the last call is the clipped
// boundary sample. Time t is the nonnegative parameter distance travelled,
// also when tracing backward.
template <class Visitor>
TraceEnd trace_geodesic(const MetricModel& m, const BundlePoint& p, const TraceOptions& opt,
                        bool backward, Visitor&& visit) {
  const double R = m.radius(), R2 = R * R;
  const double tolg = 2.0 * R * opt.tol_boundary;
  double s[3] = {p.x, p.y, p.theta};
  double r2 = s[0] * s[0] + s[1] * s[1];
  if (r2 > R2) {
    if (r2 > R2 * (1.0 + 1e-9))
      throw error(errc::domain, "geodesic start lies outside the disc");
    double sc = std::sqrt(R2 / r2) * (1.0 - 1e-14);
    s[0] *= sc;
    s[1] *= sc;
    r2 = s[0] * s[0] + s[1] * s[1];
  }
  visit(BundlePoint{s[0], s[1], s[2]}, 0.0, 0.0);
  if (r2 >= R2 * (1.0 - 1e-12)) {
    double k[3];
    m.geodesic_rhs(s[0], s[1], s[2], k);
    double vr = (backward ? -1.0 : 1.0) * (s[0] * k[0] + s[1] * k[1]);
    if (vr >= 0.0) return {0.0, {s[0], s[1], s[2]}, 0};
  }
  const double h = backward ? -opt.step : opt.step;
  const double ah = opt.step;
  double t = 0.0;
  for (int n = 1; n <= opt.max_steps; ++n) {
    double sn[3];
    geodesic_rk4_step(m, s, h, sn);
    double rn2 = sn[0] * sn[0] + sn[1] * sn[1];
    if (rn2 > R2) {
      // Bracketed false position (Illinois) on g(dt) = |x(dt)|^2 - R^2.
      double lo = 0.0, glo = r2 - R2;
      double hi = ah, ghi = rn2 - R2;
      double tb = hi, gb = ghi;
      double sb[3] = {sn[0], sn[1], sn[2]};
      for (int it = 0; it < 80 && std::abs(gb) > tolg && hi - lo > 1e-16; ++it) {
        double tn = hi - ghi * (hi - lo) / (ghi - glo);
        double pad = 1e-3 * (hi - lo);
        tn = std::clamp(tn, lo + pad, hi - pad);
        double st[3];
        geodesic_rk4_step(m, s, backward ? -tn : tn, st);
        double g = st[0] * st[0] + st[1] * st[1] - R2;
        if (g > 0.0) {
          hi = tn;
          ghi = g;
        } else {
          if (lo > 0.0) ghi *= 0.5;  // Illinois damping against one-sided stalls
          lo = tn;
          glo = g;
        }
        tb = tn;
        gb = g;
        sb[0] = st[0];
        sb[1] = st[1];
        sb[2] = st[2];
      }
      t += tb;
      visit(BundlePoint{sb[0], sb[1], sb[2]}, t, tb);
      return {t, {sb[0], sb[1], sb[2]}, n};
    }
    t += ah;
    s[0] = sn[0];
    s[1] = sn[1];
    s[2] = sn[2];
    r2 = rn2;
    visit(BundlePoint{s[0], s[1], s[2]}, t, ah);
  }
  throw error(errc::trap_budget, "geodesic exceeded the step budget ("
                                     + std::to_string(opt.max_steps)
                                     + " steps) without reaching the boundary");
}

inline TraceEnd trace_geodesic(const MetricModel& m, const BundlePoint& p,
                               const TraceOptions& opt, bool backward = false) {
  return trace_geodesic(m, p, opt, backward, [](const BundlePoint&, double, double) {});
}

// --- named operations --------------------------------------------------------

// phi_t(p); throws with the bracketing step when the ray leaves the disc first.
BundlePoint flow(const MetricModel& m, const BundlePoint& p, double t,
                 const TraceOptions& opt);

double exit_time(const MetricModel& m, const BundlePoint& p, const TraceOptions& opt);

// The boundary involution: forward endpoint for inflow points, backward
// endpoint for outflow (and tangential) points.
BoundaryPoint scattering(const MetricModel& m, const BoundaryPoint& b,
                         const TraceOptions& opt);

// (1/2) tau(b) on inflow, -(1/2) tau(reversed b) on outflow; 0 tangential.
double tau_minus(const MetricModel& m, const BoundaryPoint& b, const TraceOptions& opt);

// Recorded polyline of a forward trace.
struct GeodesicTrace {
  std::vector<BundlePoint> samples;  // uniform step, plus the clipped exit sample
  std::vector<double> times;
  double exit_time = 0;
  std::optional<BoundaryPoint> entry;  // set when the start lies on the rim
  BoundaryPoint exit;
};

GeodesicTrace trace_record(const MetricModel& m, const BundlePoint& p,
                           const TraceOptions& opt);

// --- uniform boundary grid ---------------------------------------------------

// Same node count in boundary angle and direction angle, so psi-offsets align:
// theta_k - phi_j = 2 pi (k - j) / n, and the inflow set is an exact integer
// band n/4 < (k-j) mod n < 3n/4.
struct BoundaryGrid {
  int n = 0;
  double radius = 1.0;

  BoundaryGrid() = default;
  BoundaryGrid(int n_, double radius_) : n(n_), radius(radius_) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw error(errc::config, "boundary grid size must be a power of two >= 8");
  }

  double dphi() const { return two_pi / n; }
  double phi(int j) const { return two_pi * j / n; }
  double theta(int k) const { return two_pi * k / n; }
  int offset(int j, int k) const {
    int mm = (k - j) % n;
    return mm < 0 ? mm + n : mm;
  }
  bool inflow(int j, int k) const {
    int mm = offset(j, k);
    return 4 * mm > n && 4 * mm < 3 * n;
  }
  double psi(int j, int k) const { return two_pi * offset(j, k) / n - pi; }
  double weight(int j, int k) const { return std::cos(psi(j, k)); }
  BoundaryPoint point(int j, int k) const { return {phi(j), theta(k)}; }
  int size() const { return n * n; }
  int idx(int j, int k) const { return j * n + k; }
};

// Exit data of the forward trace from every inflow boundary node.
struct BoundaryScatterTable {
  BoundaryGrid bgrid;
  std::vector<double> phi_out, theta_out;  // NaN on outflow nodes
};

BoundaryScatterTable build_boundary_scatter_table(const MetricModel& m,
                                                  const BoundaryGrid& bg,
                                                  const TraceOptions& opt);

// Entry/exit coordinates and parameter times of the maximal geodesic through
// every interior bundle node of a (spatial grid) x (angle grid) lattice.
struct SMRayTable {
  SpatialGrid grid;
  int ntheta = 0;
  std::vector<uint8_t> inside;                // spatial mask, nx*ny
  std::vector<float> tau_fwd, tau_bwd;        // per bundle node
  std::vector<float> exit_phi, exit_theta;    //   (spatial-major, fiber contiguous)
  std::vector<float> entry_phi, entry_theta;

  int node_count() const { return grid.size() * ntheta; }
  int idx(int spatial, int k) const { return spatial * ntheta + k; }
};

SMRayTable build_sm_ray_table(const MetricModel& m, const SpatialGrid& g, int ntheta,
                              const TraceOptions& opt);

}  // namespace grt
