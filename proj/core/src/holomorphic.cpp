#include "grt/holomorphic.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace grt {

namespace {

BundleField residual_plus_scalar(const BundleField& hw, const CScalarField& a) {
  BundleField out = hw;
  for (int sp = 0; sp < out.grid.size(); ++sp)
    for (int k = 0; k < out.ntheta; ++k) out.at(sp, k) += a.v[sp];
  return out;
}

// The outermost ring of mask nodes only admits one-sided derivative stencils,
// whose error does not shrink under refinement (the ring tracks the rim, where
// transport solutions lose smoothness). The fiber-averaged perp derivative is
// therefore defined on the mask eroded by one node; the ring is zero.
CScalarField averaged_perp(const BundleField& u) {
  CScalarField out = average(perp_derivative_field(u));
  const SpatialGrid& g = u.grid;
  auto mask = inside_mask(g);
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int sp = g.idx(ix, jy);
      if (!mask[sp]) continue;
      bool core = ix > 0 && ix + 1 < g.nx && jy > 0 && jy + 1 < g.ny &&
                  mask[sp - 1] && mask[sp + 1] && mask[sp - g.nx] && mask[sp + g.nx];
      if (!core) out.v[sp] = cplx{};
    }
  return out;
}

}  // namespace

CScalarField w_from_u(const BundleField& u) { return averaged_perp(u); }

CScalarField w_operator(const MetricModel& m, const CScalarField& f, int ntheta,
                        const TraceOptions& opt) {
  BundleField u = transport_solve(m, f.grid, ntheta, scalar_integrand(m, f), opt);
  return w_from_u(u);
}

CScalarField s_operator(const MetricModel& m, const BoundaryField& h,
                        const SpatialGrid& g, int ntheta, const SMRayTable* rays,
                        const TraceOptions& opt) {
  BundleField hpsi = w_psi(m, h, g, ntheta, rays, opt);
  return averaged_perp(hpsi);
}

BundleField gamma_from_u(const BundleField& u, int sign) {
  BundleField odd = parity_split(u).second;
  BundleField h = hilbert(odd);
  const cplx is{0.0, double(sign)};
  for (size_t i = 0; i < odd.v.size(); ++i) odd.v[i] += is * h.v[i];
  return odd;
}

BundleField gamma(const MetricModel& m, const CScalarField& a, int sign, int ntheta,
                  const TraceOptions& opt) {
  BundleField u = transport_solve(m, a.grid, ntheta, scalar_integrand(m, a), opt);
  return gamma_from_u(u, sign);
}

FactorResult integrating_factor(const MetricModel& m, const CScalarField& a,
                                int sign, int ntheta, const TraceOptions& opt,
                                int max_terms, double tol) {
  if (sign != 1 && sign != -1) throw error(errc::config, "sign must be +1 or -1");
  FactorResult res;
  res.b = a;
  res.terms = 1;
  const double scale = scalar_norm(m, a);
  // Constant-curvature metrics: W vanishes identically, so every correction
  // term is exactly zero and the series is its leading term.
  const bool flat_w = m.kind() != MetricKind::Perturbed || m.epsilon() == 0.0;
  if (!flat_w && scale > 0.0) {
    CScalarField term = a;
    double prev = std::numeric_limits<double>::infinity();
    const cplx mis{0.0, -double(sign)};
    for (int mi = 1; mi < max_terms; ++mi) {
      CScalarField wt = w_operator(m, term, ntheta, opt);
      for (size_t i = 0; i < wt.v.size(); ++i) wt.v[i] *= mis;
      term = std::move(wt);
      double inc = scalar_norm(m, term) / scale;
      if (inc >= prev && inc > tol)
        throw error(errc::series_diverged,
                    "Neumann corrections stopped decreasing before tolerance");
      res.increments.push_back(inc);
      for (size_t i = 0; i < term.v.size(); ++i) res.b.v[i] += term.v[i];
      ++res.terms;
      prev = inc;
      if (inc <= tol) break;
    }
  }
  res.w = gamma(m, res.b, sign, ntheta, opt);
  return res;
}

double factor_residual(const MetricModel& m, const BundleField& w,
                       const CScalarField& a, const SMRayTable* rays, double frac,
                       const TraceOptions& opt) {
  (void)m;
  BundleField hw = geodesic_derivative_field(w, rays, 0.0, opt);
  return sup_norm_interior(residual_plus_scalar(hw, a), frac);
}

double holomorphicity_report(const BundleField& u, int sign, double frac) {
  return wrong_frequency_energy(u, sign, frac);
}

BundleField exp_field(const BundleField& u) {
  BundleField out = u;
  for (cplx& z : out.v) z = std::exp(z);
  return out;
}

}  // namespace grt
