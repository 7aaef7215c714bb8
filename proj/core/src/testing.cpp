#include "grt/testing.hpp"

#include <random>

namespace grt::testing {

PairField random_pair(const SpatialGrid& g, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto poly = [&]() {
    double c[6] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    return [c](double x, double y) {
      return cplx{c[0] + c[1] * x + c[2] * y + c[3] * x * y,
                  0.5 * (c[4] * (x * x - y * y) + c[5])};
    };
  };
  auto pf = poly(), p1 = poly(), p2 = poly();
  const double R2 = sqr(g.radius);
  PairField F{CScalarField(g), {CScalarField(g), CScalarField(g)}};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!g.inside(i, j)) continue;
      int s = g.idx(i, j);
      double x = g.x(i), y = g.y(j);
      double taper = sqr(std::max(0.0, 1.0 - (x * x + y * y) / R2));
      F.f.v[s] = taper * pf(x, y);
      F.alpha.a1.v[s] = taper * p1(x, y);
      F.alpha.a2.v[s] = taper * p2(x, y);
    }
  return F;
}

BoundaryField random_inflow_data(const BoundaryGrid& bg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cplx c0{u(rng), u(rng)}, c1{u(rng), u(rng)}, c2{u(rng), u(rng)}, c3{u(rng), u(rng)};
  return make_boundary_field(
      bg,
      [=](const BoundaryPoint& b) {
        double psi = inflow_offset(b), mu = std::cos(psi);
        cplx e1 = std::polar(1.0, b.phi);
        return mu * (c0 + c1 * std::sin(psi) + c2 * e1 + c3 * std::conj(e1) +
                     0.3 * e1 * e1 * std::sin(psi));
      },
      true);
}

}  // namespace grt::testing
