#include "grt/sphere_bundle.hpp"

#include <algorithm>
#include <cmath>

#include "grt/fft.hpp"

namespace grt {

namespace {

bool g_hilbert_fault = false;

// Hilbert spectral multiplier for signed frequency k.
cplx hilbert_mult(int k, int n) {
  if (k == 0 || k == -n / 2) return {0.0, 0.0};
  cplx m = (k > 0) ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
  if (g_hilbert_fault && k == 1) m = -m;
  return m;
}

template <class F>
void spectral_map_rows(std::vector<cplx>& v, int rows, int n, F&& mult) {
  std::vector<cplx> buf(n);
  std::vector<cplx> mt(n);
  for (int b = 0; b < n; ++b) mt[b] = mult(signed_freq(b, n));
  for (int r = 0; r < rows; ++r) {
    cplx* fiber = v.data() + (size_t)r * n;
    std::copy(fiber, fiber + n, buf.begin());
    fft_forward(buf.data(), n);
    for (int b = 0; b < n; ++b) buf[b] *= mt[b];
    fft_inverse(buf.data(), n);
    std::copy(buf.begin(), buf.end(), fiber);
  }
}

AngularCoeffs fourier_rows(const std::vector<cplx>& v, int rows, int n) {
  AngularCoeffs out;
  out.ntheta = n;
  out.rows = rows;
  out.c.resize(v.size());
  std::vector<cplx> buf(n);
  for (int r = 0; r < rows; ++r) {
    const cplx* fiber = v.data() + (size_t)r * n;
    std::copy(fiber, fiber + n, buf.begin());
    fft_forward(buf.data(), n);
    for (int b = 0; b < n; ++b) out.c[(size_t)r * n + b] = buf[b] / double(n);
  }
  return out;
}

void fourier_inverse_rows(const AngularCoeffs& c, std::vector<cplx>& v) {
  int n = c.ntheta;
  std::vector<cplx> buf(n);
  for (int r = 0; r < c.rows; ++r) {
    for (int b = 0; b < n; ++b) buf[b] = c.c[(size_t)r * n + b] * double(n);
    fft_inverse(buf.data(), n);
    std::copy(buf.begin(), buf.end(), v.begin() + (size_t)r * n);
  }
}

}  // namespace

namespace testing {
void inject_hilbert_fault(bool enabled) { g_hilbert_fault = enabled; }
bool hilbert_fault_enabled() { return g_hilbert_fault; }
}  // namespace testing

BundleField make_bundle_field(const SpatialGrid& g, int ntheta, const MetricModel& m,
                              const std::function<cplx(double, double, double)>& f) {
  BundleField u(g, ntheta, m);
  auto mask = inside_mask(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int sp = g.idx(i, j);
      if (!mask[sp]) continue;
      for (int k = 0; k < ntheta; ++k) u.at(sp, k) = f(g.x(i), g.y(j), u.theta(k));
    }
  return u;
}

BoundaryField make_boundary_field(const BoundaryGrid& bg,
                                  const std::function<cplx(const BoundaryPoint&)>& f,
                                  bool inflow_only) {
  BoundaryField g(bg);
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k) {
      if (inflow_only && !bg.inflow(j, k)) continue;
      g.at(j, k) = f(bg.point(j, k));
    }
  return g;
}

AngularCoeffs angular_fourier(const BundleField& u) {
  return fourier_rows(u.v, u.grid.size(), u.ntheta);
}
AngularCoeffs angular_fourier(const BoundaryField& u) {
  return fourier_rows(u.v, u.bgrid.n, u.bgrid.n);
}

BundleField angular_fourier_inverse(const AngularCoeffs& c, const BundleField& like) {
  BundleField out(like.grid, like.ntheta, like.metric);
  fourier_inverse_rows(c, out.v);
  return out;
}
BoundaryField angular_fourier_inverse(const AngularCoeffs& c, const BoundaryField& like) {
  BoundaryField out(like.bgrid);
  fourier_inverse_rows(c, out.v);
  return out;
}

BundleField hilbert(const BundleField& u) {
  BundleField out = u;
  int n = u.ntheta;
  spectral_map_rows(out.v, u.grid.size(), n, [n](int k) { return hilbert_mult(k, n); });
  return out;
}
BoundaryField hilbert(const BoundaryField& u) {
  BoundaryField out = u;
  int n = u.bgrid.n;
  spectral_map_rows(out.v, n, n, [n](int k) { return hilbert_mult(k, n); });
  return out;
}

BundleField holo_project(const BundleField& u, int sign) {
  BundleField out = u;
  int n = u.ntheta;
  spectral_map_rows(out.v, u.grid.size(), n, [n, sign](int k) {
    return cplx{1.0, 0.0} + cplx{0.0, double(sign)} * hilbert_mult(k, n);
  });
  return out;
}
BoundaryField holo_project(const BoundaryField& u, int sign) {
  BoundaryField out = u;
  int n = u.bgrid.n;
  spectral_map_rows(out.v, n, n, [n, sign](int k) {
    return cplx{1.0, 0.0} + cplx{0.0, double(sign)} * hilbert_mult(k, n);
  });
  return out;
}

namespace {
template <class FieldT>
std::pair<FieldT, FieldT> parity_split_impl(const FieldT& u, int rows, int n) {
  FieldT even = u, odd = u;
  int half = n / 2;
  for (int r = 0; r < rows; ++r) {
    const cplx* f = u.v.data() + (size_t)r * n;
    cplx* e = even.v.data() + (size_t)r * n;
    cplx* o = odd.v.data() + (size_t)r * n;
    for (int k = 0; k < n; ++k) {
      cplx a = f[k], b = f[(k + half) % n];
      e[k] = 0.5 * (a + b);
      o[k] = 0.5 * (a - b);
    }
  }
  return {std::move(even), std::move(odd)};
}
}  // namespace

std::pair<BundleField, BundleField> parity_split(const BundleField& u) {
  return parity_split_impl(u, u.grid.size(), u.ntheta);
}
std::pair<BoundaryField, BoundaryField> parity_split(const BoundaryField& u) {
  return parity_split_impl(u, u.bgrid.n, u.bgrid.n);
}

CScalarField average(const BundleField& u) {
  CScalarField out(u.grid);
  for (int sp = 0; sp < u.grid.size(); ++sp) {
    cplx acc{};
    for (int k = 0; k < u.ntheta; ++k) acc += u.at(sp, k);
    out.v[sp] = acc / double(u.ntheta);
  }
  return out;
}

std::vector<cplx> average(const BoundaryField& u) {
  int n = u.bgrid.n;
  std::vector<cplx> out(n);
  for (int j = 0; j < n; ++j) {
    cplx acc{};
    for (int k = 0; k < n; ++k) acc += u.at(j, k);
    out[j] = acc / double(n);
  }
  return out;
}

BundleField angular_derivative(const BundleField& u) {
  BundleField out = u;
  int n = u.ntheta;
  spectral_map_rows(out.v, u.grid.size(), n, [n](int k) {
    if (k == -n / 2) return cplx{0.0, 0.0};
    return cplx{0.0, double(k)};
  });
  return out;
}

// --- interpolation -----------------------------------------------------------

BundleInterpolant::BundleInterpolant(const BundleField& u, int upsample) {
  g_ = u.grid;
  int n = u.ntheta;
  nf_ = n * upsample;
  auto mask = inside_mask(g_);

  // ghost-extend each angular slice over the spatial grid
  std::vector<cplx> work = u.v;
  {
    std::vector<cplx> slice(g_.size());
    for (int k = 0; k < n; ++k) {
      for (int sp = 0; sp < g_.size(); ++sp) slice[sp] = work[(size_t)sp * n + k];
      fill_ghost_values(g_, mask, slice);
      for (int sp = 0; sp < g_.size(); ++sp) work[(size_t)sp * n + k] = slice[sp];
    }
  }

  // spectral upsampling of every fiber (zero-padded spectrum)
  v_.assign((size_t)g_.size() * nf_, cplx{});
  std::vector<cplx> buf(n), fine(nf_);
  for (int sp = 0; sp < g_.size(); ++sp) {
    cplx* src = work.data() + (size_t)sp * n;
    bool any = false;
    for (int k = 0; k < n; ++k)
      if (src[k] != cplx{}) {
        any = true;
        break;
      }
    if (!any) continue;
    std::copy(src, src + n, buf.begin());
    fft_forward(buf.data(), n);
    std::fill(fine.begin(), fine.end(), cplx{});
    double scale = double(upsample);
    for (int b = 0; b < n; ++b) {
      int k = signed_freq(b, n);
      int fb = k >= 0 ? k : nf_ + k;
      fine[fb] = buf[b] * scale;
    }
    fft_inverse(fine.data(), nf_);
    std::copy(fine.begin(), fine.end(), v_.begin() + (size_t)sp * nf_);
  }
}

cplx BundleInterpolant::operator()(double x, double y, double theta) const {
  CubicStencil sx = cubic_stencil(g_.x0, g_.dx, g_.nx, x);
  CubicStencil sy = cubic_stencil(g_.y0, g_.dy, g_.ny, y);
  CubicStencil st = cubic_stencil_periodic(0.0, two_pi / nf_, nf_, theta);
  cplx acc{};
  for (int jy = 0; jy < 4; ++jy) {
    cplx rowy{};
    for (int jx = 0; jx < 4; ++jx) {
      const cplx* fiber = v_.data() + ((size_t)(sy.idx[jy] * g_.nx + sx.idx[jx])) * nf_;
      cplx rott{};
      for (int jt = 0; jt < 4; ++jt) rott += st.w[jt] * fiber[st.idx[jt]];
      rowy += sx.w[jx] * rott;
    }
    acc += sy.w[jy] * rowy;
  }
  return acc;
}

InflowBilinear::InflowBilinear(const BoundaryField& w) : bg_(w.bgrid) {
  const int n = bg_.n;
  mlo_ = n / 4 + 1;
  mhi_ = 3 * n / 4 - 1;
  v_.assign((size_t)n * (mhi_ - mlo_ + 1), cplx{});
  for (int j = 0; j < n; ++j)
    for (int m = mlo_; m <= mhi_; ++m)
      v_[(size_t)j * (mhi_ - mlo_ + 1) + (m - mlo_)] = w.at(j, (j + m) % n);
}

cplx InflowBilinear::operator()(double phi, double psi) const {
  const int n = bg_.n;
  const double d = bg_.dphi();
  const int cols = mhi_ - mlo_ + 1;
  double jf = wrap_2pi(phi) / d;
  int j0 = (int)std::floor(jf);
  double tj = jf - j0;
  j0 %= n;  // wrap_2pi can return two_pi - epsilon -> jf slightly below n
  int j1 = (j0 + 1) % n;
  double mf = (psi + pi) / d - mlo_;
  if (mf < 0.0 || mf > cols - 1) {
    ++clamps_;
    mf = std::clamp(mf, 0.0, (double)(cols - 1));
  }
  int m0 = std::min((int)std::floor(mf), cols - 2);
  double tm = mf - m0;
  const cplx* r0 = v_.data() + (size_t)j0 * cols + m0;
  const cplx* r1 = v_.data() + (size_t)j1 * cols + m0;
  return (1.0 - tj) * ((1.0 - tm) * r0[0] + tm * r0[1]) +
         tj * ((1.0 - tm) * r1[0] + tm * r1[1]);
}

BoundaryField upsample_torus(const BoundaryField& w, int factor) {
  if (factor <= 1) return w;
  if (factor & (factor - 1))
    throw error(errc::config, "torus upsampling factor must be a power of two");
  const int n = w.bgrid.n;
  const int N = n * factor;
  std::vector<cplx> hat(w.v);
  for (int j = 0; j < n; ++j) fft_forward(hat.data() + (size_t)j * n, n);
  std::vector<cplx> col(n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) col[j] = hat[(size_t)j * n + k];
    fft_forward(col.data(), n);
    for (int j = 0; j < n; ++j) hat[(size_t)j * n + k] = col[j];
  }
  BoundaryField out(BoundaryGrid(N, w.bgrid.radius));
  auto place = [&](int fj, int fk, cplx val) {
    int J = fj >= 0 ? fj : fj + N;
    int K = fk >= 0 ? fk : fk + N;
    out.v[(size_t)J * N + K] += val;
  };
  const int ny = n / 2;
  for (int j = 0; j < n; ++j) {
    int fj = signed_freq(j, n);
    for (int k = 0; k < n; ++k) {
      int fk = signed_freq(k, n);
      cplx val = hat[(size_t)j * n + k];
      if (val == cplx{}) continue;
      bool sj = (fj == -ny), sk = (fk == -ny);
      val *= (sj ? 0.5 : 1.0) * (sk ? 0.5 : 1.0);
      const int aj[2] = {fj, ny}, bk[2] = {fk, ny};
      for (int ia = 0; ia < (sj ? 2 : 1); ++ia)
        for (int ib = 0; ib < (sk ? 2 : 1); ++ib) place(aj[ia], bk[ib], val);
    }
  }
  for (int j = 0; j < N; ++j) fft_inverse(out.v.data() + (size_t)j * N, N);
  std::vector<cplx> colN(N);
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < N; ++j) colN[j] = out.v[(size_t)j * N + k];
    fft_inverse(colN.data(), N);
    double scale = (double)factor * factor;
    for (int j = 0; j < N; ++j) out.v[(size_t)j * N + k] = colN[j] * scale;
  }
  return out;
}

TorusBicubic::TorusBicubic(const BoundaryField& w) : bg_(w.bgrid), v_(w.v) {}

cplx TorusBicubic::operator()(double phi, double theta) const {
  const int n = bg_.n;
  const double d = bg_.dphi();
  CubicStencil sp = cubic_stencil_periodic(0.0, d, n, phi);
  CubicStencil st = cubic_stencil_periodic(0.0, d, n, theta);
  cplx acc{};
  for (int a = 0; a < 4; ++a) {
    const cplx* row = v_.data() + (size_t)sp.idx[a] * n;
    cplx r{};
    for (int b = 0; b < 4; ++b) r += st.w[b] * row[st.idx[b]];
    acc += sp.w[a] * r;
  }
  return acc;
}

// --- flow-aligned derivatives ---------------------------------------------------

namespace {

// Second-order derivative along the flow from up to three samples; dp/dm are
// the usable forward/backward offsets.
cplx flow_difference(const MetricModel& metric, const BundleInterpolant& itp,
                     const BundlePoint& p, cplx u0, double dp, double dm,
                     const TraceOptions& opt) {
  auto eval_at = [&](double t) {
    BundlePoint q = flow(metric, p, t, opt);
    return itp(q.x, q.y, q.theta);
  };
  const double eps = 1e-6;
  if (dp < eps && dm < eps) return {0.0, 0.0};
  if (dm < eps) {
    // nodes 0, dp/2, dp: one-sided second order
    cplx u1 = eval_at(dp), u2 = eval_at(0.5 * dp);
    return (-3.0 * u0 + 4.0 * u2 - u1) / dp;
  }
  if (dp < eps) {
    cplx u1 = eval_at(-dm), u2 = eval_at(-0.5 * dm);
    return (3.0 * u0 - 4.0 * u2 + u1) / dm;
  }
  cplx up = eval_at(dp), um = eval_at(-dm);
  return (dm * dm * up - dp * dp * um + (dp * dp - dm * dm) * u0) /
         (dp * dm * (dp + dm));
}

}  // namespace

cplx geodesic_derivative(const BundleField& u, const BundlePoint& p, double delta,
                         const TraceOptions& opt_in) {
  double d = delta > 0 ? delta : u.grid.dx;
  TraceOptions opt = opt_in;
  opt.step = std::min(opt.step, 0.5 * d);
  BundleInterpolant itp(u);
  double tf = trace_geodesic(u.metric, p, opt, false).tau;
  double tb = trace_geodesic(u.metric, p, opt, true).tau;
  double dp = std::min(d, 0.95 * tf), dm = std::min(d, 0.95 * tb);
  return flow_difference(u.metric, itp, p, itp(p.x, p.y, p.theta), dp, dm, opt);
}

BundleField geodesic_derivative_field(const BundleField& u, const SMRayTable* rays,
                                      double delta, const TraceOptions& opt_in) {
  if (rays && (!rays->grid.same_shape(u.grid) || rays->ntheta != u.ntheta))
    throw error(errc::config, "ray table does not match the field grid");
  double d = delta > 0 ? delta : u.grid.dx;
  TraceOptions opt = opt_in;
  opt.step = std::min(opt.step, 0.5 * d);
  BundleInterpolant itp(u);
  BundleField out(u.grid, u.ntheta, u.metric);
  const SpatialGrid& g = u.grid;
  auto mask = inside_mask(g);
  const double cmin = u.metric.min_sqrt_conformal();
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int sp = g.idx(ix, jy);
      if (!mask[sp]) continue;
      double rim_bound =
          0.95 * cmin * std::max(0.0, g.radius - std::hypot(g.x(ix), g.y(jy)));
      for (int k = 0; k < u.ntheta; ++k) {
        BundlePoint p{g.x(ix), g.y(jy), u.theta(k)};
        double dp, dm;
        if (rays) {
          int id = rays->idx(sp, k);
          dp = std::min(d, 0.95 * (double)rays->tau_fwd[id]);
          dm = std::min(d, 0.95 * (double)rays->tau_bwd[id]);
        } else {
          dp = dm = std::min(d, rim_bound);
        }
        out.at(sp, k) = flow_difference(u.metric, itp, p, u.at(sp, k), dp, dm, opt);
      }
    }
  return out;
}

BundleField perp_derivative_field(const BundleField& u) {
  const SpatialGrid& g = u.grid;
  auto mask = inside_mask(g);
  BundleField ut = angular_derivative(u);
  BundleField out(g, u.ntheta, u.metric);

  std::vector<double> einv(g.size()), lgx(g.size()), lgy(g.size());
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int sp = g.idx(ix, jy);
      if (!mask[sp]) continue;
      einv[sp] = std::exp(-u.metric.log_factor(g.x(ix), g.y(jy)));
      u.metric.log_factor_grad(g.x(ix), g.y(jy), lgx[sp], lgy[sp]);
    }

  std::vector<double> ct(u.ntheta), st(u.ntheta);
  for (int k = 0; k < u.ntheta; ++k) {
    ct[k] = std::cos(u.theta(k));
    st[k] = std::sin(u.theta(k));
  }

  CScalarField slice(g);
  for (int k = 0; k < u.ntheta; ++k) {
    for (int sp = 0; sp < g.size(); ++sp) slice.v[sp] = u.v[(size_t)sp * u.ntheta + k];
    CScalarField sx = ddx_masked(slice, mask);
    CScalarField sy = ddy_masked(slice, mask);
    for (int sp = 0; sp < g.size(); ++sp) {
      if (!mask[sp]) continue;
      cplx dth = ut.v[(size_t)sp * u.ntheta + k];
      out.v[(size_t)sp * u.ntheta + k] =
          einv[sp] * (st[k] * sx.v[sp] - ct[k] * sy.v[sp] +
                      (ct[k] * lgx[sp] + st[k] * lgy[sp]) * dth);
    }
  }
  return out;
}

cplx perp_derivative(const BundleField& u, const BundlePoint& p) {
  BundleField f = perp_derivative_field(u);
  BundleInterpolant itp(f);
  return itp(p.x, p.y, p.theta);
}

// --- norms ---------------------------------------------------------------------

double l2_norm(const BundleField& u) {
  const SpatialGrid& g = u.grid;
  auto mask = inside_mask(g);
  double acc = 0;
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int sp = g.idx(ix, jy);
      if (!mask[sp]) continue;
      double c = u.metric.conformal_factor(g.x(ix), g.y(jy));
      double s = 0;
      for (int k = 0; k < u.ntheta; ++k) s += std::norm(u.at(sp, k));
      acc += c * s;
    }
  return std::sqrt(acc * g.cell_area() * two_pi / u.ntheta);
}

double sup_norm_interior(const BundleField& u, double frac) {
  const SpatialGrid& g = u.grid;
  double r2max = sqr(frac * g.radius);
  double m = 0;
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (sqr(g.x(ix)) + sqr(g.y(jy)) > r2max) continue;
      int sp = g.idx(ix, jy);
      for (int k = 0; k < u.ntheta; ++k) m = std::max(m, std::abs(u.at(sp, k)));
    }
  return m;
}

double sup_norm_interior(const CScalarField& f, double frac) {
  const SpatialGrid& g = f.grid;
  double r2max = sqr(frac * g.radius);
  double m = 0;
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (sqr(g.x(ix)) + sqr(g.y(jy)) > r2max) continue;
      m = std::max(m, std::abs(f.v[g.idx(ix, jy)]));
    }
  return m;
}

double l2_norm_inflow(const BoundaryField& gf, const MetricModel& m) {
  const BoundaryGrid& bg = gf.bgrid;
  double rim = std::sqrt(m.conformal_factor(m.radius(), 0.0)) * m.radius();
  double acc = 0;
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k)
      if (bg.inflow(j, k)) acc += std::norm(gf.at(j, k)) * bg.weight(j, k);
  return std::sqrt(acc * rim * sqr(bg.dphi()));
}

double sup_norm(const BoundaryField& g) {
  double m = 0;
  for (const cplx& z : g.v) m = std::max(m, std::abs(z));
  return m;
}

namespace {
double wrong_frequency_ratio(const AngularCoeffs& c, int sign,
                             const std::function<bool(int)>& row_ok) {
  int n = c.ntheta;
  double wrong = 0, total = 0;
  for (int r = 0; r < c.rows; ++r) {
    if (!row_ok(r)) continue;
    for (int b = 0; b < n; ++b) {
      int k = signed_freq(b, n);
      double e = std::norm(c.at(r, b));
      total += e;
      bool bad = (k == -n / 2) || (sign > 0 ? k < 0 : k > 0);
      if (bad) wrong += e;
    }
  }
  return total > 0 ? std::sqrt(wrong / total) : 0.0;
}
}  // namespace

double wrong_frequency_energy(const BundleField& u, int sign, double interior_frac) {
  AngularCoeffs c = angular_fourier(u);
  const SpatialGrid& g = u.grid;
  double r2max = sqr(interior_frac * g.radius);
  return wrong_frequency_ratio(c, sign, [&](int sp) {
    int ix = sp % g.nx, jy = sp / g.nx;
    return sqr(g.x(ix)) + sqr(g.y(jy)) <= r2max;
  });
}

double wrong_frequency_energy(const BoundaryField& u, int sign) {
  AngularCoeffs c = angular_fourier(u);
  return wrong_frequency_ratio(c, sign, [](int) { return true; });
}

}  // namespace grt
