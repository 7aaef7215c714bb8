#include "grt/phantoms.hpp"

#include <cmath>

namespace grt {

namespace {

double taper(double r2, double cutoff) {
  if (cutoff <= 0.0) return 1.0;
  double t = 1.0 - r2 / (cutoff * cutoff);
  return t > 0.0 ? t * t : 0.0;
}

}  // namespace

cplx phantom_value(const PhantomTerm& t, double x, double y) {
  double dx = x - t.cx, dy = y - t.cy;
  double d2 = dx * dx + dy * dy;
  double shape = 0.0;
  switch (t.kind) {
    case PhantomTerm::Kind::Gaussian:
      shape = std::exp(-d2 / (2.0 * t.width * t.width));
      break;
    case PhantomTerm::Kind::Bump: {
      double s = 1.0 - d2 / (t.width * t.width);
      shape = s > 0.0 ? std::pow(s, t.power) : 0.0;
      break;
    }
  }
  shape *= taper(x * x + y * y, t.cutoff);
  return cplx{t.amplitude, t.amplitude_im} * shape;
}

CScalarField render_phantom(const std::vector<PhantomTerm>& terms, const SpatialGrid& g) {
  CScalarField f(g);
  // Shapes are specified on the unit disc; scale them with the grid radius so
  // the same catalog works on discs of any size.
  double R = g.radius;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double x = g.x(i), y = g.y(j);
      if (x * x + y * y > R * R) continue;
      cplx acc{};
      for (const PhantomTerm& t : terms) {
        PhantomTerm s = t;
        s.cx *= R;
        s.cy *= R;
        s.width *= R;
        s.cutoff *= R;
        acc += phantom_value(s, x, y);
      }
      f.v[g.idx(i, j)] = acc;
    }
  return f;
}

PhantomTerm catalog_phantom(int index) {
  using K = PhantomTerm::Kind;
  static const PhantomTerm table[] = {
      {K::Gaussian, 0.2, 0.1, 0.15, 1.0, 0.0, 0.8, 2},
      {K::Gaussian, -0.3, 0.2, 0.22, 0.8, 0.0, 0.8, 2},
      {K::Bump, 0.0, -0.25, 0.45, 1.0, 0.0, 0.85, 3},
      {K::Gaussian, 0.35, -0.3, 0.12, 0.6, 0.0, 0.75, 2},
      {K::Bump, -0.15, -0.05, 0.55, 0.9, 0.0, 0.8, 2},
  };
  int n = (int)(sizeof(table) / sizeof(table[0]));
  int i = index % n;
  if (i < 0) i += n;
  return table[i];
}

CScalarField polynomial_potential(const SpatialGrid& g, double scale) {
  CScalarField p(g);
  double R2 = g.radius * g.radius;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double x = g.x(i), y = g.y(j);
      double t = 1.0 - (x * x + y * y) / R2;
      if (t > 0.0) p.v[g.idx(i, j)] = scale * t * t;
    }
  return p;
}

OneFormField polynomial_potential_differential(const SpatialGrid& g, double scale) {
  OneFormField dp{CScalarField(g), CScalarField(g)};
  double R2 = g.radius * g.radius;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double x = g.x(i), y = g.y(j);
      double t = 1.0 - (x * x + y * y) / R2;
      if (t <= 0.0) continue;
      int s = g.idx(i, j);
      dp.a1.v[s] = -4.0 * scale * t * x / R2;
      dp.a2.v[s] = -4.0 * scale * t * y / R2;
    }
  return dp;
}

PairField gauge_pair(const CScalarField& a, const CScalarField& p) {
  auto mask = inside_mask(p.grid);
  return gauge_pair(a, p, OneFormField{ddx_masked(p, mask), ddy_masked(p, mask)});
}

PairField gauge_pair(const CScalarField& a, const CScalarField& p, const OneFormField& dp) {
  PairField out;
  out.f = p;
  for (size_t i = 0; i < out.f.v.size(); ++i) out.f.v[i] *= a.v[i];
  out.alpha = dp;
  return out;
}

}  // namespace grt
