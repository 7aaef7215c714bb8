#include "grt/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace grt {

BundlePoint flow(const MetricModel& m, const BundlePoint& p, double t,
                 const TraceOptions& opt) {
  const double R2 = sqr(m.radius());
  double s[3] = {p.x, p.y, p.theta};
  if (s[0] * s[0] + s[1] * s[1] > R2 * (1.0 + 1e-9))
    throw error(errc::domain, "flow start lies outside the disc");
  if (t == 0.0) return p;
  const bool backward = t < 0.0;
  double remaining = std::abs(t);
  double done = 0.0;
  while (remaining > 0.0) {
    double hh = std::min(opt.step, remaining);
    double sn[3];
    geodesic_rk4_step(m, s, backward ? -hh : hh, sn);
    if (sn[0] * sn[0] + sn[1] * sn[1] > R2 * (1.0 + 1e-9)) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "flow exits the disc between parameter times %.12g and %.12g",
                    (backward ? -1 : 1) * done, (backward ? -1 : 1) * (done + hh));
      throw error(errc::domain, buf);
    }
    s[0] = sn[0];
    s[1] = sn[1];
    s[2] = sn[2];
    done += hh;
    remaining -= hh;
  }
  return {s[0], s[1], s[2]};
}

double exit_time(const MetricModel& m, const BundlePoint& p, const TraceOptions& opt) {
  return trace_geodesic(m, p, opt, false).tau;
}

BoundaryPoint scattering(const MetricModel& m, const BoundaryPoint& b,
                         const TraceOptions& opt) {
  BundlePoint p = bundle_from_boundary(m.radius(), b);
  bool backward = !is_inflow(b);
  TraceEnd e = trace_geodesic(m, p, opt, backward);
  return boundary_from_bundle(e.end);
}

double tau_minus(const MetricModel& m, const BoundaryPoint& b, const TraceOptions& opt) {
  BundlePoint p = bundle_from_boundary(m.radius(), b);
  if (is_inflow(b)) return 0.5 * trace_geodesic(m, p, opt, false).tau;
  BundlePoint rev{p.x, p.y, wrap_2pi(p.theta + pi)};
  return -0.5 * trace_geodesic(m, rev, opt, false).tau;
}

GeodesicTrace trace_record(const MetricModel& m, const BundlePoint& p,
                           const TraceOptions& opt) {
  GeodesicTrace tr;
  TraceEnd e = trace_geodesic(m, p, opt, false,
                              [&](const BundlePoint& s, double t, double) {
                                tr.samples.push_back(s);
                                tr.times.push_back(t);
                              });
  tr.exit_time = e.tau;
  tr.exit = boundary_from_bundle(e.end);
  double r = std::hypot(p.x, p.y);
  if (r >= m.radius() * (1.0 - 1e-9)) tr.entry = boundary_from_bundle(p);
  return tr;
}

BoundaryScatterTable build_boundary_scatter_table(const MetricModel& m,
                                                  const BoundaryGrid& bg,
                                                  const TraceOptions& opt) {
  BoundaryScatterTable t;
  t.bgrid = bg;
  double nan = std::numeric_limits<double>::quiet_NaN();
  t.phi_out.assign(bg.size(), nan);
  t.theta_out.assign(bg.size(), nan);
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k) {
      if (!bg.inflow(j, k)) continue;
      BoundaryPoint out = scattering(m, bg.point(j, k), opt);
      t.phi_out[bg.idx(j, k)] = out.phi;
      t.theta_out[bg.idx(j, k)] = out.theta;
    }
  return t;
}

SMRayTable build_sm_ray_table(const MetricModel& m, const SpatialGrid& g, int ntheta,
                              const TraceOptions& opt) {
  SMRayTable t;
  t.grid = g;
  t.ntheta = ntheta;
  t.inside = inside_mask(g);
  int nn = g.size() * ntheta;
  t.tau_fwd.assign(nn, 0.f);
  t.tau_bwd.assign(nn, 0.f);
  t.exit_phi.assign(nn, 0.f);
  t.exit_theta.assign(nn, 0.f);
  t.entry_phi.assign(nn, 0.f);
  t.entry_theta.assign(nn, 0.f);
  double dth = two_pi / ntheta;
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int sp = g.idx(ix, jy);
      if (!t.inside[sp]) continue;
      for (int k = 0; k < ntheta; ++k) {
        BundlePoint p{g.x(ix), g.y(jy), k * dth};
        TraceEnd fwd = trace_geodesic(m, p, opt, false);
        TraceEnd bwd = trace_geodesic(m, p, opt, true);
        int id = t.idx(sp, k);
        BoundaryPoint ex = boundary_from_bundle(fwd.end);
        BoundaryPoint en = boundary_from_bundle(bwd.end);
        t.tau_fwd[id] = (float)fwd.tau;
        t.tau_bwd[id] = (float)bwd.tau;
        t.exit_phi[id] = (float)ex.phi;
        t.exit_theta[id] = (float)ex.theta;
        t.entry_phi[id] = (float)en.phi;
        t.entry_theta[id] = (float)en.theta;
      }
    }
  return t;
}

}  // namespace grt
