#include <cmath>

#include "doctest.h"
#include "grt/grid.hpp"

using namespace grt;

TEST_SUITE("grid") {

TEST_CASE("cubic stencil reproduces cubics, also when clamped at array ends") {
  const double x0 = -1.0, dx = 0.125;
  const int n = 17;
  auto f = [](double x) { return 0.3 - 1.7 * x + 0.9 * x * x - 0.4 * x * x * x; };
  for (double x : {-0.999, -0.93, -0.5, 0.0, 0.37, 0.93, 0.999}) {
    CubicStencil st = cubic_stencil(x0, dx, n, x);
    double acc = 0;
    for (int k = 0; k < 4; ++k) acc += st.w[k] * f(x0 + st.idx[k] * dx);
    CHECK(acc == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("periodic cubic stencil wraps and reproduces cubics of the angle") {
  const int n = 16;
  const double dx = two_pi / n;
  auto f = [](double t) { return std::cos(t) + 0.5 * std::sin(2 * t); };
  // not exact on trig functions, but O(dx^4); check interpolation error bound
  double emax = 0;
  for (int i = 0; i < 200; ++i) {
    double t = two_pi * i / 200.0 + 0.013;
    CubicStencil st = cubic_stencil_periodic(0.0, dx, n, t);
    double acc = 0;
    for (int k = 0; k < 4; ++k) acc += st.w[k] * f(st.idx[k] * dx);
    emax = std::max(emax, std::abs(acc - f(t)));
  }
  CHECK(emax < 5e-3);
  // and weights sum to one everywhere (partition of unity)
  for (double t : {-7.3, -0.1, 0.0, 1.0, 9.9}) {
    CubicStencil st = cubic_stencil_periodic(0.0, dx, n, t);
    double s = st.w[0] + st.w[1] + st.w[2] + st.w[3];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("disc interpolant is exact on quadratics including the rim region") {
  SpatialGrid g(65, 65, 1.0);
  auto f = [](double x, double y) { return 1.0 + x - 2.0 * y + 0.5 * x * x - x * y + y * y; };
  ScalarField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      u(i, j) = g.inside(i, j) ? f(g.x(i), g.y(j)) : 0.0;
  ScalarInterpolant<double> itp(u);
  double emax = 0;
  for (int t = 0; t < 400; ++t) {
    double r = 0.999 * std::sqrt((t % 20 + 0.5) / 20.0);
    double a = two_pi * t / 400.0;
    double x = r * std::cos(a), y = r * std::sin(a);
    emax = std::max(emax, std::abs(itp(x, y) - f(x, y)));
  }
  CHECK(emax < 1e-11);
}

TEST_CASE("disc interpolant converges at high order on a smooth field") {
  auto f = [](double x, double y) { return std::sin(2.0 * x + 0.7) * std::cos(1.5 * y); };
  auto err_for = [&](int n) {
    SpatialGrid g(n, n, 1.0);
    ScalarField u(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        u(i, j) = g.inside(i, j) ? f(g.x(i), g.y(j)) : 0.0;
    ScalarInterpolant<double> itp(u);
    double emax = 0;
    for (int t = 0; t < 500; ++t) {
      double r = 0.995 * std::sqrt((t % 25 + 0.5) / 25.0);
      double a = two_pi * t / 500.0 + 0.003;
      emax = std::max(emax, std::abs(itp(r * std::cos(a), r * std::sin(a)) - f(r * std::cos(a), r * std::sin(a))));
    }
    return emax;
  };
  double e1 = err_for(33), e2 = err_for(65);
  CHECK(e2 < e1 / 6.0);  // at least third order near the rim
  CHECK(e2 < 2e-5);
}

TEST_CASE("masked x and y derivatives are exact on quadratics away from 2-point ends") {
  SpatialGrid g(65, 65, 1.0);
  auto m = inside_mask(g);
  ScalarField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (m[g.idx(i, j)]) u(i, j) = g.x(i) * g.x(i) + g.x(i) * g.y(j);
  ScalarField dx = ddx_masked(u, m), dy = ddy_masked(u, m);
  double ex = 0, ey = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!m[g.idx(i, j)]) continue;
      if (sqr(g.x(i)) + sqr(g.y(j)) > 0.9 * 0.9) continue;
      ex = std::max(ex, std::abs(dx(i, j) - (2 * g.x(i) + g.y(j))));
      ey = std::max(ey, std::abs(dy(i, j) - g.x(i)));
    }
  CHECK(ex < 1e-11);
  CHECK(ey < 1e-11);
}

}  // TEST_SUITE
