#include "grt/inversion.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

namespace grt {

namespace {

bool constant_curvature(const MetricModel& m) {
  return m.kind() != MetricKind::Perturbed || m.epsilon() == 0.0;
}

// Nodes whose four neighbours are all inside. The outermost ring of the mask
// only admits one-sided flow stencils whose error does not shrink under
// refinement, so fiber-averaged flow derivatives are reported on the mask
// eroded by one node, the same convention as the fiber-average operators.
std::vector<uint8_t> eroded_mask(const SpatialGrid& g) {
  auto mask = inside_mask(g);
  std::vector<uint8_t> core(mask.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int c = g.idx(i, j);
      if (!mask[c]) continue;
      bool ok = i > 0 && i + 1 < g.nx && j > 0 && j + 1 < g.ny && mask[c - 1] &&
                mask[c + 1] && mask[c - g.nx] && mask[c + g.nx];
      core[c] = ok ? 1 : 0;
    }
  return core;
}

void keep_only(CScalarField& f, const std::vector<uint8_t>& keep) {
  for (size_t i = 0; i < f.v.size(); ++i)
    if (!keep[i]) f.v[i] = cplx{};
}

void keep_only(BundleField& u, const std::vector<uint8_t>& keep) {
  for (int s = 0; s < u.grid.size(); ++s)
    if (!keep[s])
      for (int k = 0; k < u.ntheta; ++k) u.at(s, k) = cplx{};
}

//  -((flow derivative of u) + a u)_0  on the eroded mask.
CScalarField damped_average(const MetricModel& m, const BundleField& u,
                            const CScalarField* a, const SMRayTable* rays,
                            double delta, const TraceOptions& opt) {
  BundleField hu = geodesic_derivative_field(u, rays, delta, opt);
  if (a) {
    for (int s = 0; s < u.grid.size(); ++s)
      for (int k = 0; k < u.ntheta; ++k) hu.at(s, k) += a->v[s] * u.at(s, k);
  }
  CScalarField f = average(hu);
  for (auto& z : f.v) z = -z;
  keep_only(f, eroded_mask(u.grid));
  (void)m;
  return f;
}

BoundaryField zero_extend(const BoundaryField& data) {
  BoundaryField d = data;
  const BoundaryGrid& bg = d.bgrid;
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k)
      if (!bg.inflow(j, k)) d.at(j, k) = cplx{};
  return d;
}

BoundaryField imag_part(const BoundaryField& u) {
  BoundaryField out = u;
  for (auto& z : out.v) z = cplx{z.imag(), 0.0};
  return out;
}

BundleField broadcast(const CScalarField& f, int ntheta, const MetricModel& m) {
  BundleField out(f.grid, ntheta, m);
  auto mask = inside_mask(f.grid);
  for (int s = 0; s < f.grid.size(); ++s) {
    if (!mask[s]) continue;
    for (int k = 0; k < ntheta; ++k) out.at(s, k) = f.v[s];
  }
  return out;
}

// Trace of the projected odd transport solution on the boundary bundle. The
// transport solution of a scalar source restricted to the rim is the
// zero-extended transform of that source, so the projection is a pure fiber
// operation on boundary data: no interior solve is needed.
BoundaryField boundary_gamma(const MetricModel& m, const CScalarField& b, int sign,
                             const BoundaryGrid& bg, const TraceOptions& opt) {
  BoundaryField ib = forward_rays(m, bg, opt, scalar_integrand(m, b));
  return holo_project(parity_split(ib).second, sign);
}

BoundaryField exp_boundary(const BoundaryField& u, double scale) {
  BoundaryField out = u;
  for (auto& z : out.v) z = std::exp(scale * z);
  return out;
}

BoundaryField multiply(const BoundaryField& a, const BoundaryField& b) {
  BoundaryField out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

BundleField multiply(const BundleField& a, const BundleField& b) {
  BundleField out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

// The core of the constant-curvature inverter, applicable to any metric (on a
// perturbed metric its output is the function plus the twice-applied
// fiber-average correction, which the series inverter removes).
CScalarField projection_scheme(const MetricModel& m, const BoundaryField& data,
                               const SpatialGrid& grid, int ntheta,
                               const SMRayTable* rays, const TraceOptions& opt) {
  BoundaryField d = zero_extend(data);
  BoundaryField ustar = holo_project(parity_split(d).second, +1);
  // The imaginary part of the projected trace extends into the bundle as a
  // first integral; the real part is recovered fiberwise since the projection
  // has zero fiber mean. The trace is smooth on the full boundary torus for
  // interior-supported sources, so the high-order spread applies.
  BundleField j = spread_first_integral(m, imag_part(ustar), grid, ntheta, rays, opt);
  BundleField re = hilbert(j);
  for (auto& z : re.v) z = -z;
  return damped_average(m, re, nullptr, rays, 0.0, opt);
}

// --- least-squares pair inversion ---------------------------------------------

struct PairLeastSquares {
  const MetricModel& m;
  SpatialGrid grid;
  BoundaryGrid bg;
  int ntheta;
  const SMRayTable* rays;
  TraceOptions opt;
  bool with_function, with_form;
  std::vector<uint8_t> mask, core;
  BundleField ones;
  long clamps = 0;

  PairLeastSquares(const MetricModel& m_, const SpatialGrid& g, const BoundaryGrid& b,
                   int nt, const SMRayTable* r, const TraceOptions& o, bool wfn, bool wfm)
      : m(m_), grid(g), bg(b), ntheta(nt), rays(r), opt(o), with_function(wfn),
        with_form(wfm), mask(inside_mask(g)), core(eroded_mask(g)),
        ones(g, nt, m_) {
    for (auto& z : ones.v) z = 1.0;
  }

  OneFormField rotated_gradient(const CScalarField& q) const {
    CScalarField qx = ddx_masked(q, mask), qy = ddy_masked(q, mask);
    for (auto& z : qy.v) z = -z;
    return {std::move(qy), std::move(qx)};
  }

  BoundaryField forward(const CScalarField& phi, const CScalarField& q) const {
    PairField p{phi, with_form ? rotated_gradient(q)
                               : OneFormField{CScalarField(grid), CScalarField(grid)}};
    if (!with_function) p.f = CScalarField(grid);
    return forward_attenuated(m, nullptr, p, bg, opt);
  }

  void adjoint(const BoundaryField& r, CScalarField& phi, CScalarField& q) {
    PairField b = adjoint_weighted(m, ones, r, grid, rays, opt, &clamps);
    phi = with_function ? std::move(b.f) : CScalarField(grid);
    q = CScalarField(grid);
    if (with_form) {
      CScalarField a1y = ddy_masked(b.alpha.a1, mask);
      CScalarField a2x = ddx_masked(b.alpha.a2, mask);
      for (int jy = 0; jy < grid.ny; ++jy)
        for (int ix = 0; ix < grid.nx; ++ix) {
          int s = grid.idx(ix, jy);
          if (!core[s]) continue;  // stream potential is pinned to zero on the rim
          q.v[s] = (a1y.v[s] - a2x.v[s]) / m.conformal_factor(grid.x(ix), grid.y(jy));
        }
    }
  }

  double norm2(const CScalarField& phi, const CScalarField& q) const {
    cplx acc = scalar_inner_product(m, phi, phi) + scalar_inner_product(m, q, q);
    return std::max(0.0, acc.real());
  }
};

PairInversion pair_cgls(const MetricModel& m, const BoundaryField& data,
                        const SpatialGrid& grid, int ntheta, const SMRayTable* rays,
                        const TraceOptions& opt, double tol, int max_iterations,
                        bool with_function, bool with_form, long* clamp_count) {
  PairLeastSquares op(m, grid, data.bgrid, ntheta, rays, opt, with_function, with_form);
  PairInversion res{CScalarField(grid), CScalarField(grid),
                    {CScalarField(grid), CScalarField(grid)}, 0, 0.0, 0.0};

  BoundaryField r = zero_extend(data);
  const double dnorm = l2_norm_inflow(r, m);
  if (dnorm == 0.0) return res;

  CScalarField zphi(grid), zq(grid), sphi(grid), sq(grid);
  op.adjoint(r, sphi, sq);
  double gamma = op.norm2(sphi, sq);
  const double g0 = gamma;
  if (g0 == 0.0) return res;
  CScalarField pphi = sphi, pq = sq;

  double data_res = 1.0, best = 1.0, rel = 1.0;
  int it = 0;
  while (it < max_iterations && gamma > 0.0) {
    BoundaryField t = op.forward(pphi, pq);
    cplx den = inflow_inner_product(m, t, t);
    if (!(den.real() > 0.0)) break;
    double alpha = gamma / den.real();
    for (size_t i = 0; i < zphi.v.size(); ++i) {
      zphi.v[i] += alpha * pphi.v[i];
      zq.v[i] += alpha * pq.v[i];
    }
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] -= alpha * t.v[i];
    ++it;

    data_res = l2_norm_inflow(r, m) / dnorm;
    if (!std::isfinite(data_res) || data_res > 10.0 * std::max(best, 1.0))
      throw error(errc::solver_diverged, "pair inversion residual grew out of control");
    best = std::min(best, data_res);

    op.adjoint(r, sphi, sq);
    double gnew = op.norm2(sphi, sq);
    rel = std::sqrt(gnew / g0);
    if (rel <= tol) {
      gamma = gnew;
      break;
    }
    double beta = gnew / gamma;
    gamma = gnew;
    for (size_t i = 0; i < pphi.v.size(); ++i) {
      pphi.v[i] = sphi.v[i] + beta * pphi.v[i];
      pq.v[i] = sq.v[i] + beta * pq.v[i];
    }
  }

  res.phi = std::move(zphi);
  res.alpha = op.rotated_gradient(zq);
  res.q = std::move(zq);
  res.iterations = it;
  res.normal_residual = rel;
  res.data_residual = data_res;
  if (clamp_count) *clamp_count += op.clamps;
  return res;
}

// Periodic cubic read of a rim profile (one value per boundary node).
cplx profile_read(const std::vector<cplx>& p, const BoundaryGrid& bg, double phi) {
  CubicStencil st = cubic_stencil_periodic(0.0, bg.dphi(), bg.n, phi);
  cplx acc{};
  for (int k = 0; k < 4; ++k) acc += st.w[k] * p[st.idx[k]];
  return acc;
}

// Field on the bundle reading a boundary-torus interpolant at each node's
// forward exit point.
BundleField exit_read(const TorusBicubic& t, const SMRayTable& rays, const MetricModel& m) {
  BundleField out(rays.grid, rays.ntheta, m);
  for (int s = 0; s < rays.grid.size(); ++s) {
    if (!rays.inside[s]) continue;
    for (int k = 0; k < rays.ntheta; ++k) {
      int id = rays.idx(s, k);
      out.at(s, k) = t(rays.exit_phi[id], rays.exit_theta[id]);
    }
  }
  return out;
}

}  // namespace

const char* to_string(I0Backend b) {
  switch (b) {
    case I0Backend::ExplicitCC: return "ExplicitCC";
    case I0Backend::FredholmW2: return "FredholmW2";
    case I0Backend::LeastSquares: return "LeastSquares";
  }
  return "unknown";
}

CScalarField invert_i0_explicit(const MetricModel& m, const BoundaryField& data,
                                const SpatialGrid& grid, int ntheta,
                                const SMRayTable* rays, const TraceOptions& opt) {
  if (!constant_curvature(m))
    throw error(errc::backend_mismatch,
                "the fiberwise projection inverter requires constant curvature");
  return projection_scheme(m, data, grid, ntheta, rays, opt);
}

SeriesInversion invert_i0_fredholm(const MetricModel& m, const BoundaryField& data,
                                   const SpatialGrid& grid, int ntheta,
                                   const SMRayTable* rays, const TraceOptions& opt,
                                   int max_terms, double tol) {
  SeriesInversion res;
  res.f = projection_scheme(m, data, grid, ntheta, rays, opt);
  res.terms = 1;
  const double scale = scalar_norm(m, res.f);
  if (scale == 0.0) return res;

  CScalarField term = res.f;
  double prev = std::numeric_limits<double>::infinity();
  while (res.terms < max_terms) {
    CScalarField w1 = w_operator(m, term, ntheta, opt);
    term = w_operator(m, w1, ntheta, opt);
    for (auto& z : term.v) z = -z;
    double inc = scalar_norm(m, term) / scale;
    if (inc >= prev && inc > tol)
      throw error(errc::series_diverged,
                  "fiber-average corrections stopped decreasing before tolerance");
    res.increments.push_back(inc);
    for (size_t i = 0; i < res.f.v.size(); ++i) res.f.v[i] += term.v[i];
    ++res.terms;
    prev = inc;
    if (inc <= tol) break;
  }
  return res;
}

PairInversion invert_i0_pairs(const MetricModel& m, const BoundaryField& data,
                              const SpatialGrid& grid, int ntheta,
                              const SMRayTable* rays, const TraceOptions& opt,
                              double tol, int max_iterations) {
  return pair_cgls(m, data, grid, ntheta, rays, opt, tol, max_iterations, true, true,
                   nullptr);
}

ReconstructionResult reconstruct_attenuated(const MetricModel& m, const CScalarField& a,
                                            const BoundaryField& sinogram,
                                            const ReconstructionConfig& config) {
  const SpatialGrid& grid = a.grid;
  const BoundaryGrid& bg = sinogram.bgrid;
  if (std::abs(grid.radius - m.radius()) > 1e-12 ||
      std::abs(bg.radius - m.radius()) > 1e-12)
    throw error(errc::config, "attenuation grid and sinogram must live on the metric disc");
  if (config.i0_backend == I0Backend::ExplicitCC && !constant_curvature(m))
    throw error(errc::backend_mismatch,
                "the ExplicitCC backend requires a constant-curvature metric");
  const int ntheta = config.ntheta > 0 ? config.ntheta : bg.n;
  const TraceOptions& opt = config.trace;

  ReconstructionResult out;
  ReconstructionDiagnostics& diag = out.diagnostics;

  SMRayTable rays = build_sm_ray_table(m, grid, ntheta, opt);
  BoundaryScatterTable scat = build_boundary_scatter_table(m, bg, opt);

  // Step 1: the data, zero over outflow directions.
  BoundaryField d = zero_extend(sinogram);

  // One conjugation chain per factor sign. The real path runs only the
  // spectrally one-sided factor and takes real parts at the end; the other
  // path runs both and combines the projections.
  struct Chain {
    int sign;                // one-sidedness of the factor
    FactorResult factor;     // w on the bundle (and its generator)
    BoundaryField w_rim;     // trace of w on the boundary bundle
    BoundaryField beta;      // projected conjugated data
    BundleField v;           // recomposed one-sided part of the conjugated solution
    PairInversion pair;
  };

  auto run_chain = [&](int sign) {
    Chain c;
    c.sign = sign;
    // Step 2: integrating factor with H(w) = -a.
    c.factor = integrating_factor(m, a, sign, ntheta, opt, config.neumann_max_terms,
                                  config.neumann_tol);
    c.w_rim = boundary_gamma(m, c.factor.b, sign, bg, opt);
    // Step 3: project the conjugated data onto the opposite spectral side.
    c.beta = holo_project(multiply(exp_boundary(c.w_rim, -1.0), d), -sign);
    // Step 4: the projected part solves a transport equation whose source is a
    // (function, solenoidal form) pair; its boundary jump is in the range of
    // the plain transform, so the pair is recovered and transported back.
    // beta is smooth on the full torus, so its reads get the upsampled stencil.
    TorusBicubic tbeta(upsample_torus(c.beta, 4));
    BoundaryField jump(bg);
    for (int j = 0; j < bg.n; ++j)
      for (int k = 0; k < bg.n; ++k) {
        if (!bg.inflow(j, k)) continue;
        int id = bg.idx(j, k);
        jump.at(j, k) = c.beta.at(j, k) - tbeta(scat.phi_out[id], scat.theta_out[id]);
      }
    if (config.i0_backend == I0Backend::LeastSquares) {
      c.pair = pair_cgls(m, jump, grid, ntheta, &rays, opt, config.cgls_tol,
                         config.cgls_max_iterations, true, true,
                         &diag.interpolation_clamps);
    } else {
      // Split the jump by ray reversal: the even part is the transform of the
      // function, the odd part that of the form; the function half goes to the
      // dedicated inverter, the form half to the least-squares solver.
      InflowBilinear read(jump);
      BoundaryField even(bg), odd(bg);
      for (int j = 0; j < bg.n; ++j)
        for (int k = 0; k < bg.n; ++k) {
          if (!bg.inflow(j, k)) continue;
          int id = bg.idx(j, k);
          BoundaryPoint rev{scat.phi_out[id], scat.theta_out[id] + pi};
          cplx vr = read(rev.phi, inflow_offset(rev));
          cplx vf = jump.at(j, k);
          even.at(j, k) = 0.5 * (vf + vr);
          odd.at(j, k) = 0.5 * (vf - vr);
        }
      diag.interpolation_clamps += read.clamps();
      CScalarField phi;
      if (config.i0_backend == I0Backend::ExplicitCC) {
        phi = invert_i0_explicit(m, even, grid, ntheta, &rays, opt);
      } else {
        phi = invert_i0_fredholm(m, even, grid, ntheta, &rays, opt,
                                 config.neumann_max_terms, config.neumann_tol)
                  .f;
      }
      c.pair = pair_cgls(m, odd, grid, ntheta, &rays, opt, config.cgls_tol,
                         config.cgls_max_iterations, false, true,
                         &diag.interpolation_clamps);
      c.pair.phi = std::move(phi);
    }
    BundleField vtr = transport_solve(
        m, grid, ntheta, pair_integrand(m, PairField{c.pair.phi, c.pair.alpha}), opt);
    c.v = exit_read(tbeta, rays, m);
    for (size_t i = 0; i < c.v.v.size(); ++i) c.v.v[i] += vtr.v[i];
    diag.cgls_iterations += c.pair.iterations;
    diag.cgls_normal_residual = std::max(diag.cgls_normal_residual, c.pair.normal_residual);
    diag.cgls_data_residual = std::max(diag.cgls_data_residual, c.pair.data_residual);
    return c;
  };

  Chain plus = run_chain(+1);
  diag.factor_terms = plus.factor.terms;
  diag.factor_wrong_frequency = holomorphicity_report(plus.factor.w, +1);
  diag.v_wrong_frequency = wrong_frequency_energy(plus.v, -1, 0.9);

  // Step 5: recombine and strip the fiber mean.
  BundleField mhat(grid, ntheta, m);
  BoundaryField mhat_rim(bg);
  if (config.real_valued) {
    BundleField p = holo_project(multiply(exp_field(plus.factor.w), plus.v), -1);
    for (size_t i = 0; i < mhat.v.size(); ++i) mhat.v[i] = 0.5 * p.v[i].real();
    BoundaryField pr = holo_project(multiply(exp_boundary(plus.w_rim, 1.0), plus.beta), -1);
    for (size_t i = 0; i < mhat_rim.v.size(); ++i) mhat_rim.v[i] = 0.5 * pr.v[i].real();
  } else {
    Chain minus = run_chain(-1);
    BundleField p = holo_project(multiply(exp_field(plus.factor.w), plus.v), -1);
    BundleField q = holo_project(multiply(exp_field(minus.factor.w), minus.v), +1);
    for (size_t i = 0; i < mhat.v.size(); ++i) mhat.v[i] = 0.25 * (p.v[i] + q.v[i]);
    BoundaryField pr = holo_project(multiply(exp_boundary(plus.w_rim, 1.0), plus.beta), -1);
    BoundaryField qr = holo_project(multiply(exp_boundary(minus.w_rim, 1.0), minus.beta), +1);
    for (size_t i = 0; i < mhat_rim.v.size(); ++i)
      mhat_rim.v[i] = 0.25 * (pr.v[i] + qr.v[i]);
  }
  CScalarField m0 = average(mhat);
  BundleField uhat = mhat;
  {
    BundleField b = broadcast(m0, ntheta, m);
    for (size_t i = 0; i < uhat.v.size(); ++i) uhat.v[i] -= b.v[i];
  }
  diag.uhat_mean_norm = scalar_norm(m, average(uhat));

  // Boundary trace of the mean-free part, then the rim profile of the mean.
  std::vector<cplx> uhat_rim_mean = average(mhat_rim);
  BoundaryField du(bg);
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k)
      du.at(j, k) = d.at(j, k) - (mhat_rim.at(j, k) - uhat_rim_mean[j]);
  std::vector<cplx> rim_profile = average(du);

  // Step 6: the fiber mean, read at the exit point and corrected by the odd
  // transport solve, then averaged over the fiber.
  BundleField qf(grid, ntheta, m);
  for (int s = 0; s < grid.size(); ++s) {
    if (!rays.inside[s]) continue;
    for (int k = 0; k < ntheta; ++k)
      qf.at(s, k) = profile_read(rim_profile, bg, rays.exit_phi[rays.idx(s, k)]);
  }
  {
    BundleField g = geodesic_derivative_field(uhat, &rays, config.fd_delta, opt);
    for (int s = 0; s < grid.size(); ++s)
      for (int k = 0; k < ntheta; ++k) g.at(s, k) += a.v[s] * uhat.at(s, k);
    keep_only(g, eroded_mask(grid));
    BundleField godd = parity_split(g).second;
    CScalarField corr = average(u_transport(godd, opt));
    BundleField b = broadcast(corr, ntheta, m);
    for (size_t i = 0; i < qf.v.size(); ++i) qf.v[i] += b.v[i];
  }
  CScalarField qavg = average(qf);
  {
    BundleField b = broadcast(qavg, ntheta, m);
    for (size_t i = 0; i < b.v.size(); ++i) b.v[i] = qf.v[i] - b.v[i];
    double scale = std::max(l2_norm(broadcast(qavg, ntheta, m)), 1e-300);
    diag.q_angular_spread = l2_norm(b) / scale;
  }

  // Step 7: damped flow derivative of u = q + uhat, fiber averaged.
  BundleField u = broadcast(qavg, ntheta, m);
  for (size_t i = 0; i < u.v.size(); ++i) u.v[i] += uhat.v[i];
  out.f = damped_average(m, u, &a, &rays, config.fd_delta, opt);
  if (config.real_valued)
    for (auto& z : out.f.v) z = cplx{z.real(), 0.0};
  return out;
}

HolomorphicityCheck verify_holomorphic_solution(const MetricModel& m, const CScalarField& a,
                                                const CScalarField& p, int ntheta,
                                                const TraceOptions& opt,
                                                double interior_frac) {
  const SpatialGrid& grid = p.grid;
  auto mask = inside_mask(grid);

  FactorResult w = integrating_factor(m, a, +1, ntheta, opt);
  CScalarField ap(grid);
  for (int s = 0; s < grid.size(); ++s) ap.v[s] = a.v[s] * p.v[s];
  OneFormField dp{ddx_masked(p, mask), ddy_masked(p, mask)};
  BundleFn pair = pair_integrand(m, PairField{ap, dp});

  BundleField src(grid, ntheta, m);
  BundleField damp = exp_field(w.w);
  for (int jy = 0; jy < grid.ny; ++jy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      int s = grid.idx(ix, jy);
      if (!mask[s]) continue;
      for (int k = 0; k < ntheta; ++k)
        src.at(s, k) = pair(grid.x(ix), grid.y(jy), src.theta(k)) / damp.at(s, k);
    }
  BundleField v = u_transport(src, opt);

  HolomorphicityCheck r;
  r.wrong_frequency = wrong_frequency_energy(v, +1, interior_frac);
  CScalarField v0 = average(v);
  BundleField dev = broadcast(v0, ntheta, m);
  for (size_t i = 0; i < dev.v.size(); ++i) dev.v[i] = v.v[i] - dev.v[i];
  r.fiber_energy = l2_norm(dev);
  return r;
}

}  // namespace grt
