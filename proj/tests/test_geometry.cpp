#include <cmath>

#include "doctest.h"
#include "grt/geometry.hpp"
#include "grt/grid.hpp"

using namespace grt;

namespace {
const TraceOptions kFine{0.002, 1e-10, 400000};
const TraceOptions kMid{0.01, 1e-10, 200000};

double boundary_dist(const BoundaryPoint& a, const BoundaryPoint& b) {
  return std::abs(wrap_pi(a.phi - b.phi)) + std::abs(wrap_pi(a.theta - b.theta));
}
}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("flat disc: straight-line flow forward and backward") {
  MetricModel m = MetricModel::euclidean(1.0);
  BundlePoint q = flow(m, {1.0, 0.0, pi}, 1.0, kMid);
  CHECK(std::abs(q.x) < 1e-12);
  CHECK(std::abs(q.y) < 1e-12);
  CHECK(std::abs(wrap_pi(q.theta - pi)) < 1e-12);

  BundlePoint b = flow(m, {0.0, 0.0, 0.0}, -0.5, kMid);
  CHECK(b.x == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(b.y) < 1e-14);
}

TEST_CASE("flow reports the bracketing step when the ray leaves the disc") {
  MetricModel m = MetricModel::euclidean(1.0);
  CHECK_THROWS_WITH_AS(flow(m, {0.9, 0.0, 0.0}, 0.5, kMid), doctest::Contains("exits"),
                       error);
}

TEST_CASE("radial flow matches the closed form on curved discs") {
  // r(t) = tanh(sqrt(|k|) t / 2) / sqrt(|k|) for k < 0, tan analogue for k > 0.
  MetricModel hyp = MetricModel::constant_curvature(-1.0, 0.9);
  BundlePoint q = flow(hyp, {0.0, 0.0, 0.0}, 0.5, kFine);
  CHECK(q.x == doctest::Approx(0.24491866240370913).epsilon(1e-9));
  CHECK(std::abs(q.y) < 1e-13);

  MetricModel sph = MetricModel::constant_curvature(0.5, 1.0);
  BundlePoint s = flow(sph, {0.0, 0.0, 0.0}, 0.5, kFine);
  CHECK(s.x == doctest::Approx(0.2526371357760774).epsilon(1e-9));
}

TEST_CASE("exit times match chord closed forms") {
  MetricModel eu = MetricModel::euclidean(1.0);
  CHECK(exit_time(eu, {1.0, 0.0, pi}, kMid) == doctest::Approx(2.0).epsilon(1e-9));

  // entry at boundary angle 0 with psi = pi/3 from the inward normal
  BundlePoint p = bundle_from_boundary(1.0, boundary_from_psi(0.0, pi / 3));
  CHECK(exit_time(eu, p, kMid) == doctest::Approx(1.0).epsilon(1e-9));

  MetricModel hyp = MetricModel::constant_curvature(-1.0, 0.9);
  BundlePoint ph0 = bundle_from_boundary(0.9, boundary_from_psi(0.3, 0.0));
  CHECK(exit_time(hyp, ph0, kFine) == doctest::Approx(5.888877958332881).epsilon(1e-7));
  BundlePoint ph3 = bundle_from_boundary(0.9, boundary_from_psi(-1.1, pi / 3));
  CHECK(exit_time(hyp, ph3, kFine) == doctest::Approx(1.0912593143628513).epsilon(1e-8));

  MetricModel sph = MetricModel::constant_curvature(0.5, 1.0);
  BundlePoint ps0 = bundle_from_boundary(1.0, boundary_from_psi(2.0, 0.0));
  CHECK(exit_time(sph, ps0, kFine) == doctest::Approx(3.4816790054684126).epsilon(1e-8));
  BundlePoint ps3 = bundle_from_boundary(1.0, boundary_from_psi(2.0, pi / 3));
  CHECK(exit_time(sph, ps3, kFine) == doctest::Approx(2.70204343542416).epsilon(1e-8));
}

TEST_CASE("flat chord lengths equal 2 cos(psi) across a boundary sweep") {
  MetricModel eu = MetricModel::euclidean(1.0);
  double emax = 0;
  for (int j = 0; j < 12; ++j)
    for (int s = 0; s < 11; ++s) {
      double phi = two_pi * j / 12.0;
      double psi = -1.45 + 2.9 * s / 10.0;
      BundlePoint p = bundle_from_boundary(1.0, boundary_from_psi(phi, psi));
      emax = std::max(emax, std::abs(exit_time(eu, p, kMid) - 2.0 * std::cos(psi)));
    }
  CHECK(emax < 1e-9);  // RK4 is exact on straight lines; only the crossing solve remains
}

TEST_CASE("tangential rays exit immediately") {
  for (auto m : {MetricModel::euclidean(1.0), MetricModel::constant_curvature(0.5, 1.0)}) {
    BundlePoint p = bundle_from_boundary(m.radius(), {0.4, 0.4 + pi / 2});
    CHECK(exit_time(m, p, kMid) < 1e-9);
  }
}

TEST_CASE("geodesic speed is one in the metric at every sample") {
  MetricModel m = MetricModel::perturbed(0.3, 1.0, 0.2, {});
  double emax = 0;
  for (int i = 0; i < 50; ++i) {
    double r = 0.99 * std::sqrt((i + 0.5) / 50.0);
    double a = 2.399963 * i;  // golden-angle scatter
    double x = r * std::cos(a), y = r * std::sin(a);
    double k[3];
    m.geodesic_rhs(x, y, 1.7 * i, k);
    double speed = std::sqrt(m.conformal_factor(x, y)) * std::hypot(k[0], k[1]);
    emax = std::max(emax, std::abs(speed - 1.0));
  }
  CHECK(emax < 1e-13);
}

TEST_CASE("flow composes: phi_s then phi_t equals phi_{s+t}") {
  MetricModel m = MetricModel::constant_curvature(0.5, 1.0);
  BundlePoint p{0.2, -0.3, 0.9};
  BundlePoint a = flow(m, flow(m, p, 0.4, kFine), 0.35, kFine);
  BundlePoint b = flow(m, p, 0.75, kFine);
  CHECK(std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(wrap_pi(a.theta - b.theta)) <
        1e-9);
}

TEST_CASE("scattering of a flat diameter and the grazing limit") {
  MetricModel eu = MetricModel::euclidean(1.0);
  BoundaryPoint out = scattering(eu, boundary_from_psi(0.0, 0.0), kMid);
  CHECK(std::abs(wrap_pi(out.phi - pi)) < 1e-9);
  CHECK(std::abs(wrap_pi(out.theta - pi)) < 1e-9);

  double delta = 0.01;
  BoundaryPoint g = scattering(eu, boundary_from_psi(0.0, pi / 2 - delta), kMid);
  CHECK(std::abs(wrap_pi(g.phi)) < 3 * delta);
}

TEST_CASE("scattering is an involution on inflow and outflow alike") {
  auto check_involution = [](const MetricModel& m, const TraceOptions& opt, double tol) {
    double worst = 0;
    for (int j = 0; j < 8; ++j)
      for (int s = 1; s < 8; ++s) {
        double phi = two_pi * j / 8.0 + 0.05;
        double psi = -1.35 + 2.7 * s / 8.0;
        BoundaryPoint b = boundary_from_psi(phi, psi);
        BoundaryPoint bb = scattering(m, scattering(m, b, opt), opt);
        worst = std::max(worst, boundary_dist(bb, b));
      }
    return worst;
  };
  CHECK(check_involution(MetricModel::euclidean(1.0), kMid, 0.0) < 1e-9);

  MetricModel sph = MetricModel::constant_curvature(0.5, 1.0);
  double coarse = check_involution(sph, kMid, 0.0);
  double fine = check_involution(sph, kFine, 0.0);
  CHECK(fine < 1e-8);
  CHECK((fine < coarse / 10.0 || coarse < 1e-11));

  MetricModel pert = MetricModel::perturbed(-0.4, 1.0, 0.15, {});
  CHECK(check_involution(pert, kFine, 0.0) < 1e-8);
}

TEST_CASE("half-chord time function and its reversal antisymmetry") {
  MetricModel eu = MetricModel::euclidean(1.0);
  CHECK(tau_minus(eu, boundary_from_psi(0.0, 0.0), kMid) == doctest::Approx(1.0).epsilon(1e-9));

  BoundaryPoint b = boundary_from_psi(0.7, 0.3);
  BoundaryPoint rev{b.phi, wrap_2pi(b.theta + pi)};
  CHECK(std::abs(tau_minus(eu, b, kMid) + tau_minus(eu, rev, kMid)) < 1e-9);

  BoundaryPoint tang{0.4, 0.4 + pi / 2};
  CHECK(std::abs(tau_minus(eu, tang, kMid)) < 1e-9);
}

TEST_CASE("entry weight is the cosine of the normal offset") {
  CHECK(santalo_weight(boundary_from_psi(1.1, 0.0)) == doctest::Approx(1.0));
  CHECK(santalo_weight(boundary_from_psi(0.2, pi / 3)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(santalo_weight(boundary_from_psi(0.2, pi / 2 - 1e-8)) ==
        doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("recorded traces end on the rim and carry entry coordinates") {
  MetricModel m = MetricModel::constant_curvature(-0.5, 1.0);
  GeodesicTrace tr = trace_record(m, bundle_from_boundary(1.0, boundary_from_psi(0.9, 0.4)), kMid);
  REQUIRE(tr.samples.size() > 10);
  CHECK(tr.entry.has_value());
  const BundlePoint& last = tr.samples.back();
  CHECK(std::abs(std::hypot(last.x, last.y) - 1.0) < 1e-9);
  CHECK(tr.exit_time == doctest::Approx(tr.times.back()));

  GeodesicTrace ti = trace_record(m, {0.1, 0.2, 1.0}, kMid);
  CHECK(!ti.entry.has_value());
}

TEST_CASE("step budget overrun raises the trapping error") {
  MetricModel m = MetricModel::euclidean(1.0);
  TraceOptions tiny{0.01, 1e-10, 5};
  CHECK_THROWS_AS(exit_time(m, {1.0, 0.0, pi}, tiny), error);
  try {
    exit_time(m, {1.0, 0.0, pi}, tiny);
  } catch (const error& e) {
    CHECK(e.code() == errc::trap_budget);
  }
}

TEST_CASE("constructor rejects non-simple parameter choices") {
  CHECK_THROWS_AS(MetricModel::constant_curvature(1.2, 1.0), error);
  CHECK_THROWS_AS(MetricModel::constant_curvature(-1.0, 1.0), error);
  CHECK_NOTHROW(MetricModel::constant_curvature(-1.0, 0.9));
}

TEST_CASE("numeric Gaussian curvature of the conformal factor matches the model") {
  auto check = [](const MetricModel& m, double tol) {
    SpatialGrid g(129, 129, m.radius());
    double worst = 0;
    for (int j = 2; j < g.ny - 2; ++j)
      for (int i = 2; i < g.nx - 2; ++i) {
        double x = g.x(i), y = g.y(j);
        if (x * x + y * y > sqr(0.8 * m.radius())) continue;
        auto lam = [&](double a, double b) { return m.log_factor(a, b); };
        double lap = (lam(x + g.dx, y) + lam(x - g.dx, y) - 2 * lam(x, y)) / sqr(g.dx) +
                     (lam(x, y + g.dy) + lam(x, y - g.dy) - 2 * lam(x, y)) / sqr(g.dy);
        double K = -lap / m.conformal_factor(x, y);
        worst = std::max(worst, std::abs(K - m.gauss_curvature(x, y)));
      }
    CHECK(worst < tol);
  };
  check(MetricModel::constant_curvature(0.5, 1.0), 5e-4);
  check(MetricModel::constant_curvature(-0.5, 1.0), 5e-4);
  check(MetricModel::euclidean(1.0), 1e-12);
  check(MetricModel::perturbed(0.3, 1.0, 0.25, {}), 2e-3);
}

TEST_CASE("integer inflow band of the boundary grid matches the strict cosine test") {
  BoundaryGrid bg(16, 1.0);
  int count = 0;
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k) {
      bool in = bg.inflow(j, k);
      double c = std::cos(bg.theta(k) - bg.phi(j));
      if (std::abs(c) > 1e-9) CHECK(in == (c < 0));
      if (in) ++count;
      if (in) CHECK(std::abs(bg.weight(j, k) - std::cos(bg.psi(j, k))) < 1e-15);
    }
  CHECK(count == 16 * 7);  // n/2 - 1 inflow directions per boundary node
}

TEST_CASE("bundle ray tables agree with direct traces") {
  MetricModel m = MetricModel::constant_curvature(0.4, 1.0);
  SpatialGrid g(17, 17, 1.0);
  TraceOptions opt{0.01, 1e-10, 200000};
  SMRayTable t = build_sm_ray_table(m, g, 16, opt);
  int checked = 0;
  for (int jy = 3; jy < 17; jy += 5)
    for (int ix = 2; ix < 17; ix += 5) {
      if (!t.inside[g.idx(ix, jy)]) continue;
      for (int k = 0; k < 16; k += 3) {
        BundlePoint p{g.x(ix), g.y(jy), two_pi * k / 16.0};
        TraceEnd fwd = trace_geodesic(m, p, opt, false);
        int id = t.idx(g.idx(ix, jy), k);
        CHECK(std::abs(t.tau_fwd[id] - fwd.tau) < 1e-5);
        CHECK(std::abs(wrap_pi(t.exit_phi[id] - boundary_from_bundle(fwd.end).phi)) < 1e-5);
        ++checked;
      }
    }
  CHECK(checked > 20);
}

}  // TEST_SUITE
