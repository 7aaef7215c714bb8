#include "grt/transport.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace grt {

// --- integrand adapters ---------------------------------------------------------

BundleFn pair_integrand(const MetricModel& m, const PairField& F) {
  // Empty components count as zero so callers can pass function-only or
  // form-only pairs without allocating zero fields.
  using Itp = ScalarInterpolant<cplx>;
  std::shared_ptr<Itp> fi, a1, a2;
  if (!F.f.v.empty()) fi = std::make_shared<Itp>(F.f);
  if (!F.alpha.a1.v.empty()) a1 = std::make_shared<Itp>(F.alpha.a1);
  if (!F.alpha.a2.v.empty()) a2 = std::make_shared<Itp>(F.alpha.a2);
  return [m, fi, a1, a2](double x, double y, double theta) -> cplx {
    cplx val = fi ? (*fi)(x, y) : cplx{};
    if (a1 || a2) {
      double el = std::exp(-m.log_factor(x, y));  // xi = e^{-lambda} (cos, sin)
      cplx form{};
      if (a1) form += std::cos(theta) * (*a1)(x, y);
      if (a2) form += std::sin(theta) * (*a2)(x, y);
      val += el * form;
    }
    return val;
  };
}

BundleFn field_integrand(const BundleField& F) {
  auto itp = std::make_shared<BundleInterpolant>(F);
  return [itp](double x, double y, double theta) { return (*itp)(x, y, theta); };
}

BundleFn scalar_integrand(const MetricModel&, const CScalarField& a) {
  auto itp = std::make_shared<ScalarInterpolant<cplx>>(a);
  return [itp](double x, double y, double) { return (*itp)(x, y); };
}

// --- ray integrals onto the inflow boundary ------------------------------------

BoundaryField forward_rays(const MetricModel& m, const BoundaryGrid& bg,
                           const TraceOptions& opt, const BundleFn& src,
                           const BundleFn* att, const BundleFn* weight) {
  if (std::abs(bg.radius - m.radius()) > 1e-12 * m.radius())
    throw error(errc::config, "boundary grid radius does not match the metric");
  BoundaryField out(bg);
  const double R = m.radius();
  for (int j = 0; j < bg.n; ++j) {
    for (int k = 0; k < bg.n; ++k) {
      if (!bg.inflow(j, k)) continue;
      BundlePoint p = bundle_from_boundary(R, bg.point(j, k));
      cplx acc{}, f_prev{}, att_prev{}, att_acc{};
      bool first = true;
      trace_geodesic(m, p, opt, false, [&](const BundlePoint& s, double, double dt) {
        cplx f_cur = src(s.x, s.y, s.theta);
        if (weight) f_cur *= (*weight)(s.x, s.y, s.theta);
        if (att) {
          cplx a_cur = (*att)(s.x, s.y, s.theta);
          if (!first) att_acc += 0.5 * dt * (att_prev + a_cur);
          att_prev = a_cur;
          f_cur *= std::exp(att_acc);
        }
        if (!first) acc += 0.5 * dt * (f_prev + f_cur);
        f_prev = f_cur;
        first = false;
      });
      out.at(j, k) = acc;
    }
  }
  return out;
}

BoundaryField forward_attenuated(const MetricModel& m, const CScalarField* a,
                                 const BundleField& F, const BoundaryGrid& bg,
                                 const TraceOptions& opt) {
  BundleFn src = field_integrand(F);
  if (!a) return forward_rays(m, bg, opt, src);
  BundleFn att = scalar_integrand(m, *a);
  return forward_rays(m, bg, opt, src, &att);
}

BoundaryField forward_attenuated(const MetricModel& m, const CScalarField* a,
                                 const PairField& F, const BoundaryGrid& bg,
                                 const TraceOptions& opt) {
  BundleFn src = pair_integrand(m, F);
  if (!a) return forward_rays(m, bg, opt, src);
  BundleFn att = scalar_integrand(m, *a);
  return forward_rays(m, bg, opt, src, &att);
}

BoundaryField forward_weighted(const MetricModel& m, const BundleField& rho,
                               const BundleField& F, const BoundaryGrid& bg,
                               const TraceOptions& opt) {
  BundleFn src = field_integrand(F);
  BundleFn wt = field_integrand(rho);
  return forward_rays(m, bg, opt, src, nullptr, &wt);
}

// --- transport solutions on the bundle ------------------------------------------

BundleField transport_solve(const MetricModel& m, const SpatialGrid& g, int ntheta,
                            const BundleFn& src, const TraceOptions& opt) {
  BundleField u(g, ntheta, m);
  auto mask = inside_mask(g);
  for (int jy = 0; jy < g.ny; ++jy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int s = g.idx(ix, jy);
      if (!mask[s]) continue;
      double x = g.x(ix), y = g.y(jy);
      for (int k = 0; k < ntheta; ++k) {
        cplx acc{}, prev{};
        bool first = true;
        trace_geodesic(m, {x, y, u.theta(k)}, opt, false,
                       [&](const BundlePoint& q, double, double dt) {
                         cplx cur = src(q.x, q.y, q.theta);
                         if (!first) acc += 0.5 * dt * (prev + cur);
                         prev = cur;
                         first = false;
                       });
        u.at(s, k) = acc;
      }
    }
  }
  return u;
}

BundleField u_transport(const BundleField& F, const TraceOptions& opt) {
  return transport_solve(F.metric, F.grid, F.ntheta, field_integrand(F), opt);
}

BundleField w_psi(const MetricModel& m, const BoundaryField& w, const SpatialGrid& g,
                  int ntheta, const SMRayTable* rays, const TraceOptions& opt,
                  long* clamp_count) {
  if (rays && (!rays->grid.same_shape(g) || rays->ntheta != ntheta))
    throw error(errc::config, "ray table does not match the requested grids");
  BundleField out(g, ntheta, m);
  InflowBilinear itp(w);
  auto mask = inside_mask(g);
  for (int jy = 0; jy < g.ny; ++jy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int s = g.idx(ix, jy);
      if (!mask[s]) continue;
      for (int k = 0; k < ntheta; ++k) {
        double ephi, etheta;
        if (rays) {
          int id = rays->idx(s, k);
          ephi = rays->entry_phi[id];
          etheta = rays->entry_theta[id];
        } else {
          TraceEnd e =
              trace_geodesic(m, {g.x(ix), g.y(jy), out.theta(k)}, opt, true);
          BoundaryPoint b = boundary_from_bundle(e.end);
          ephi = b.phi;
          etheta = b.theta;
        }
        out.at(s, k) = itp(ephi, wrap_pi(etheta - ephi - pi));
      }
    }
  }
  if (clamp_count) *clamp_count = itp.clamps();
  return out;
}

BundleField spread_first_integral(const MetricModel& m, const BoundaryField& w,
                                  const SpatialGrid& g, int ntheta,
                                  const SMRayTable* rays, const TraceOptions& opt,
                                  int upsample) {
  if (rays && (!rays->grid.same_shape(g) || rays->ntheta != ntheta))
    throw error(errc::config, "ray table does not match the requested grids");
  TorusBicubic itp(upsample_torus(w, upsample));
  BundleField out(g, ntheta, m);
  auto mask = inside_mask(g);
  for (int jy = 0; jy < g.ny; ++jy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int s = g.idx(ix, jy);
      if (!mask[s]) continue;
      for (int k = 0; k < ntheta; ++k) {
        double ephi, etheta;
        if (rays) {
          int id = rays->idx(s, k);
          ephi = rays->entry_phi[id];
          etheta = rays->entry_theta[id];
        } else {
          TraceEnd e = trace_geodesic(m, {g.x(ix), g.y(jy), out.theta(k)}, opt, true);
          BoundaryPoint b = boundary_from_bundle(e.end);
          ephi = b.phi;
          etheta = b.theta;
        }
        out.at(s, k) = itp(ephi, etheta);
      }
    }
  }
  return out;
}

BoundaryField even_continuation(const MetricModel& m, const BoundaryField& w,
                                const TraceOptions& opt) {
  const BoundaryGrid& bg = w.bgrid;
  BoundaryField out(bg);
  InflowBilinear itp(w);
  for (int j = 0; j < bg.n; ++j) {
    for (int k = 0; k < bg.n; ++k) {
      if (bg.inflow(j, k)) {
        out.at(j, k) = w.at(j, k);
      } else {
        BoundaryPoint b = scattering(m, bg.point(j, k), opt);
        out.at(j, k) = itp(b.phi, wrap_pi(b.theta - b.phi - pi));
      }
    }
  }
  return out;
}

// --- adjoint, normal operator ----------------------------------------------------

PairField adjoint_weighted(const MetricModel& m, const BundleField& rho,
                           const BoundaryField& g, const SpatialGrid& grid,
                           const SMRayTable* rays, const TraceOptions& opt,
                           long* clamp_count) {
  if (!rho.grid.same_shape(grid))
    throw error(errc::config, "weight field does not live on the requested grid");
  const int nt = rho.ntheta;
  BundleField gpsi = w_psi(m, g, grid, nt, rays, opt, clamp_count);
  PairField out{CScalarField(grid), {CScalarField(grid), CScalarField(grid)}};
  auto mask = inside_mask(grid);
  std::vector<double> cs(nt), sn(nt);
  for (int k = 0; k < nt; ++k) {
    cs[k] = std::cos(two_pi * k / nt);
    sn[k] = std::sin(two_pi * k / nt);
  }
  const double dth = two_pi / nt;
  for (int jy = 0; jy < grid.ny; ++jy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      int s = grid.idx(ix, jy);
      if (!mask[s]) continue;
      cplx m0{}, m1{}, m2{};
      for (int k = 0; k < nt; ++k) {
        cplx b = std::conj(rho.at(s, k)) * gpsi.at(s, k);
        m0 += b;
        m1 += b * cs[k];
        m2 += b * sn[k];
      }
      double el = std::exp(m.log_factor(grid.x(ix), grid.y(jy)));
      out.f.v[s] = m0 * dth;
      out.alpha.a1.v[s] = el * m1 * dth;
      out.alpha.a2.v[s] = el * m2 * dth;
    }
  }
  return out;
}

PairField normal_operator(const MetricModel& m, const CScalarField& a,
                          const PairField& F, const BoundaryGrid& bg, int ntheta,
                          const SMRayTable* rays, const TraceOptions& opt) {
  const SpatialGrid& grid = F.f.grid;
  BundleFn att = scalar_integrand(m, a);
  BundleFn src = pair_integrand(m, F);
  BoundaryField sino = forward_rays(m, bg, opt, src, &att);
  BoundaryField chord_att = forward_rays(m, bg, opt, att);  // I^0 a per ray
  BoundaryField rescaled(bg);
  for (size_t i = 0; i < rescaled.v.size(); ++i)
    rescaled.v[i] = std::exp(std::conj(chord_att.v[i])) * sino.v[i];
  BundleField ua = transport_solve(m, grid, ntheta, att, opt);
  BundleField rho = ua;
  for (auto& z : rho.v) z = std::exp(-z);
  return adjoint_weighted(m, rho, rescaled, grid, rays, opt);
}

// --- inner products ---------------------------------------------------------------

cplx pair_inner_product(const MetricModel& m, const PairField& a, const PairField& b) {
  const SpatialGrid& g = a.f.v.empty() ? a.alpha.a1.grid : a.f.grid;
  const SpatialGrid& gb = b.f.v.empty() ? b.alpha.a1.grid : b.f.grid;
  if (!g.same_shape(gb))
    throw error(errc::config, "pair fields live on different grids");
  auto mask = inside_mask(g);
  // Empty components count as zero, matching pair_integrand.
  bool ff = !a.f.v.empty() && !b.f.v.empty();
  bool aa = !a.alpha.a1.v.empty() && !b.alpha.a1.v.empty();
  cplx acc{};
  for (int jy = 0; jy < g.ny; ++jy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int s = g.idx(ix, jy);
      if (!mask[s]) continue;
      if (ff) acc += a.f.v[s] * std::conj(b.f.v[s]) * m.conformal_factor(g.x(ix), g.y(jy));
      if (aa)
        acc += a.alpha.a1.v[s] * std::conj(b.alpha.a1.v[s]) +
               a.alpha.a2.v[s] * std::conj(b.alpha.a2.v[s]);
    }
  }
  return acc * g.cell_area();
}

double pair_norm(const MetricModel& m, const PairField& a) {
  return std::sqrt(std::max(0.0, pair_inner_product(m, a, a).real()));
}

cplx scalar_inner_product(const MetricModel& m, const CScalarField& a,
                          const CScalarField& b) {
  const SpatialGrid& g = a.grid;
  if (!g.same_shape(b.grid))
    throw error(errc::config, "scalar fields live on different grids");
  auto mask = inside_mask(g);
  cplx acc{};
  for (int jy = 0; jy < g.ny; ++jy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int s = g.idx(ix, jy);
      if (!mask[s]) continue;
      acc += a.v[s] * std::conj(b.v[s]) * m.conformal_factor(g.x(ix), g.y(jy));
    }
  }
  return acc * g.cell_area();
}

double scalar_norm(const MetricModel& m, const CScalarField& a) {
  return std::sqrt(std::max(0.0, scalar_inner_product(m, a, a).real()));
}

cplx inflow_inner_product(const MetricModel& m, const BoundaryField& u,
                          const BoundaryField& v) {
  const BoundaryGrid& bg = u.bgrid;
  const double R = m.radius();
  const double arc = std::sqrt(m.conformal_factor(R, 0.0)) * R;  // rim length element
  const double d = bg.dphi();
  cplx acc{};
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k) {
      if (!bg.inflow(j, k)) continue;
      acc += u.at(j, k) * std::conj(v.at(j, k)) * bg.weight(j, k);
    }
  return acc * arc * d * d;
}

// --- solenoidal decomposition ------------------------------------------------------

CScalarField chart_divergence(const OneFormField& alpha) {
  auto mask = inside_mask(alpha.a1.grid);
  CScalarField d1 = ddx_masked(alpha.a1, mask);
  CScalarField d2 = ddy_masked(alpha.a2, mask);
  for (size_t i = 0; i < d1.v.size(); ++i) d1.v[i] += d2.v[i];
  return d1;
}

namespace {

// Five-point Laplacian with boundary-fitted arm lengths at the rim; Dirichlet
// zero on the circle. Rows are the strictly interior nodes.
struct FittedLaplacian {
  std::vector<int> nodes;              // unknown row -> grid index
  std::vector<int> row_of;             // grid index -> row (-1 outside/boundary)
  std::vector<double> ae, aw, an, as_; // arm lengths
  std::vector<int> ce, cw, cn, cs;     // neighbour rows (-1 = boundary value 0)
  std::vector<double> diag;

  explicit FittedLaplacian(const SpatialGrid& g) {
    const double R = g.radius, R2 = R * R * (1.0 - 1e-12);
    row_of.assign(g.size(), -1);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (sqr(g.x(i)) + sqr(g.y(j)) < R2) {
          row_of[g.idx(i, j)] = (int)nodes.size();
          nodes.push_back(g.idx(i, j));
        }
    int n = (int)nodes.size();
    ae.resize(n); aw.resize(n); an.resize(n); as_.resize(n);
    ce.resize(n); cw.resize(n); cn.resize(n); cs.resize(n);
    diag.resize(n);
    for (int r = 0; r < n; ++r) {
      int i = nodes[r] % g.nx, j = nodes[r] / g.nx;
      double x = g.x(i), y = g.y(j);
      double cx = std::sqrt(std::max(0.0, R * R - y * y));  // rim along the x-axis
      double cy = std::sqrt(std::max(0.0, R * R - x * x));
      auto arm = [&](int ii, int jj, double cut, double h, int& col) {
        col = -1;
        if (ii >= 0 && ii < g.nx && jj >= 0 && jj < g.ny) col = row_of[g.idx(ii, jj)];
        if (col >= 0) return h;
        return std::clamp(cut, 1e-12, h);
      };
      ae[r] = arm(i + 1, j, cx - x, g.dx, ce[r]);
      aw[r] = arm(i - 1, j, cx + x, g.dx, cw[r]);
      an[r] = arm(i, j + 1, cy - y, g.dy, cn[r]);
      as_[r] = arm(i, j - 1, cy + y, g.dy, cs[r]);
      diag[r] = -2.0 * (1.0 / (ae[r] * aw[r]) + 1.0 / (an[r] * as_[r]));
    }
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    int n = (int)nodes.size();
    for (int r = 0; r < n; ++r) {
      double ue = ce[r] >= 0 ? u[ce[r]] : 0.0;
      double uw = cw[r] >= 0 ? u[cw[r]] : 0.0;
      double un = cn[r] >= 0 ? u[cn[r]] : 0.0;
      double us = cs[r] >= 0 ? u[cs[r]] : 0.0;
      out[r] = 2.0 * (ue / (ae[r] * (ae[r] + aw[r])) + uw / (aw[r] * (ae[r] + aw[r])) +
                      un / (an[r] * (an[r] + as_[r])) + us / (as_[r] * (an[r] + as_[r]))) +
               diag[r] * u[r];
    }
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PoissonResult poisson_dirichlet(const SpatialGrid& g, const std::vector<double>& rhs,
                                double tol, int max_iterations) {
  if ((int)rhs.size() != g.size())
    throw error(errc::config, "right-hand side does not match the grid");
  FittedLaplacian A(g);
  const int n = (int)A.nodes.size();
  std::vector<double> b(n);
  for (int r = 0; r < n; ++r) b[r] = rhs[A.nodes[r]];
  double bnorm = std::sqrt(dot(b, b));
  PoissonResult res;
  res.u.assign(g.size(), 0.0);
  if (bnorm == 0.0) return res;

  // Jacobi-preconditioned BiCGStab.
  std::vector<double> x(n, 0.0), r(b), rh(b), p(n, 0.0), v(n, 0.0);
  std::vector<double> ph(n), sh(n), s(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double resid = 1.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    double rho1 = dot(rh, r);
    if (std::abs(rho1) < 1e-300) break;
    if (it == 0) {
      p = r;
    } else {
      double beta = (rho1 / rho) * (alpha / omega);
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho1;
    for (int i = 0; i < n; ++i) ph[i] = p[i] / A.diag[i];
    A.apply(ph, v);
    double rhv = dot(rh, v);
    if (std::abs(rhv) < 1e-300) break;
    alpha = rho1 / rhv;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    double snorm = std::sqrt(dot(s, s));
    if (snorm / bnorm < tol) {
      for (int i = 0; i < n; ++i) x[i] += alpha * ph[i];
      resid = snorm / bnorm;
      ++it;
      break;
    }
    for (int i = 0; i < n; ++i) sh[i] = s[i] / A.diag[i];
    A.apply(sh, t);
    double tt = dot(t, t);
    if (tt < 1e-300) break;
    omega = dot(t, s) / tt;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    resid = std::sqrt(dot(r, r)) / bnorm;
    if (resid < tol) {
      ++it;
      break;
    }
  }
  if (resid > tol)
    throw error(errc::solver_diverged,
                "Poisson solve stalled at relative residual " + std::to_string(resid));
  for (int r2 = 0; r2 < n; ++r2) res.u[A.nodes[r2]] = x[r2];
  res.iterations = it;
  res.residual = resid;
  return res;
}

SolenoidalResult solenoidal_decompose(const MetricModel& m, const OneFormField& alpha,
                                      double tol, int max_iterations) {
  const SpatialGrid& g = alpha.a1.grid;
  if (std::abs(g.radius - m.radius()) > 1e-12 * m.radius())
    throw error(errc::config, "one-form grid radius does not match the metric");
  CScalarField div = chart_divergence(alpha);
  std::vector<double> re(g.size()), im(g.size());
  for (int i = 0; i < g.size(); ++i) {
    re[i] = div.v[i].real();
    im[i] = div.v[i].imag();
  }
  PoissonResult pr = poisson_dirichlet(g, re, tol, max_iterations);
  PoissonResult pi_ = poisson_dirichlet(g, im, tol, max_iterations);
  SolenoidalResult out;
  out.p = CScalarField(g);
  for (int i = 0; i < g.size(); ++i) out.p.v[i] = cplx{pr.u[i], pi_.u[i]};
  auto mask = inside_mask(g);
  CScalarField px = ddx_masked(out.p, mask);
  CScalarField py = ddy_masked(out.p, mask);
  out.alpha_s = OneFormField{alpha.a1, alpha.a2};
  for (int i = 0; i < g.size(); ++i) {
    out.alpha_s.a1.v[i] -= px.v[i];
    out.alpha_s.a2.v[i] -= py.v[i];
  }
  out.iterations = pr.iterations + pi_.iterations;
  out.residual = std::max(pr.residual, pi_.residual);
  return out;
}

}  // namespace grt
