#include "grt/metric.hpp"

#include <cmath>
#include <cstdio>

namespace grt {

MetricModel::MetricModel(MetricKind k, double kappa, double radius, double eps,
                         const BumpSpec& b)
    : kind_(k), kappa_(kappa), radius_(radius), epsilon_(eps), bump_(b) {
  if (radius <= 0) throw error(errc::config, "metric radius must be positive");
  if (std::abs(kappa) * radius * radius >= 1.0)
    throw error(errc::config,
                "|kappa| * radius^2 must be < 1 so the disc stays simple and the "
                "conformal factor stays positive");
  if (b.sigma <= 0) throw error(errc::config, "bump sigma must be positive");
}

MetricModel MetricModel::euclidean(double radius) {
  return MetricModel(MetricKind::Euclidean, 0.0, radius, 0.0, {});
}

MetricModel MetricModel::constant_curvature(double kappa, double radius) {
  return MetricModel(MetricKind::ConstantCurvature, kappa, radius, 0.0, {});
}

MetricModel MetricModel::perturbed(double kappa, double radius, double epsilon,
                                   const BumpSpec& bump) {
  return MetricModel(MetricKind::Perturbed, kappa, radius, epsilon, bump);
}

double MetricModel::bump_value(double x, double y) const {
  double r2 = x * x + y * y;
  double R2 = radius_ * radius_;
  if (r2 >= R2) return 0.0;
  double u = 1.0 - r2 / R2;
  double dx = x - bump_.cx, dy = y - bump_.cy;
  double gauss = std::exp(-(dx * dx + dy * dy) / (2.0 * bump_.sigma * bump_.sigma));
  return bump_.amplitude * gauss * u * u * u;
}

void MetricModel::bump_grad(double x, double y, double& bx, double& by) const {
  double r2 = x * x + y * y;
  double R2 = radius_ * radius_;
  if (r2 >= R2) {
    bx = by = 0.0;
    return;
  }
  double u = 1.0 - r2 / R2;
  double dx = x - bump_.cx, dy = y - bump_.cy;
  double s2 = bump_.sigma * bump_.sigma;
  double gauss = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
  double taper = u * u * u;
  double dtaper = -3.0 * u * u / R2;  // d/d(r^2)
  double A = bump_.amplitude;
  bx = A * (gauss * (-dx / s2) * taper + gauss * dtaper * 2.0 * x);
  by = A * (gauss * (-dy / s2) * taper + gauss * dtaper * 2.0 * y);
}

double MetricModel::bump_laplacian(double x, double y) const {
  double r2 = x * x + y * y;
  double R2 = radius_ * radius_;
  if (r2 >= R2) return 0.0;
  double u = 1.0 - r2 / R2;
  double dx = x - bump_.cx, dy = y - bump_.cy;
  double s2 = bump_.sigma * bump_.sigma;
  double gauss = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
  double T = u * u * u;
  double T1 = -3.0 * u * u / R2;          // dT/d(r^2)
  double T2 = 6.0 * u / (R2 * R2);        // d2T/d(r^2)^2
  // For F(r^2): lap F = 4 r^2 F'' + 4 F'. Cross terms via product rule.
  double gx = -dx / s2, gy = -dy / s2;    // grad(log gauss)
  double lap_gauss = gauss * (gx * gx + gy * gy - 2.0 / s2);
  double lap_T = 4.0 * r2 * T2 + 4.0 * T1;
  double cross = 2.0 * gauss * (gx * 2.0 * x + gy * 2.0 * y) * T1;
  return bump_.amplitude * (lap_gauss * T + cross + gauss * lap_T);
}

double MetricModel::conformal_factor(double x, double y) const {
  switch (kind_) {
    case MetricKind::Euclidean:
      return 1.0;
    case MetricKind::ConstantCurvature: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      return 4.0 / (q * q);
    }
    case MetricKind::Perturbed: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      return 4.0 / (q * q) * std::exp(epsilon_ * bump_value(x, y));
    }
  }
  return 1.0;
}

double MetricModel::log_factor(double x, double y) const {
  switch (kind_) {
    case MetricKind::Euclidean:
      return 0.0;
    case MetricKind::ConstantCurvature: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      return std::log(2.0) - std::log(q);
    }
    case MetricKind::Perturbed: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      return std::log(2.0) - std::log(q) + 0.5 * epsilon_ * bump_value(x, y);
    }
  }
  return 0.0;
}

void MetricModel::log_factor_grad(double x, double y, double& lx, double& ly) const {
  switch (kind_) {
    case MetricKind::Euclidean:
      lx = ly = 0.0;
      return;
    case MetricKind::ConstantCurvature: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      lx = -2.0 * kappa_ * x / q;
      ly = -2.0 * kappa_ * y / q;
      return;
    }
    case MetricKind::Perturbed: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      double bx, by;
      bump_grad(x, y, bx, by);
      lx = -2.0 * kappa_ * x / q + 0.5 * epsilon_ * bx;
      ly = -2.0 * kappa_ * y / q + 0.5 * epsilon_ * by;
      return;
    }
  }
}

double MetricModel::min_sqrt_conformal() const {
  double base;
  switch (kind_) {
    case MetricKind::Euclidean:
      return 1.0;
    case MetricKind::ConstantCurvature:
    case MetricKind::Perturbed:
      base = kappa_ >= 0 ? 2.0 / (1.0 + kappa_ * radius_ * radius_) : 2.0;
      break;
    default:
      base = 1.0;
  }
  if (kind_ == MetricKind::Perturbed)
    base *= std::exp(-0.5 * std::abs(epsilon_) * std::abs(bump_.amplitude));
  return base;
}

double MetricModel::gauss_curvature(double x, double y) const {
  switch (kind_) {
    case MetricKind::Euclidean:
      return 0.0;
    case MetricKind::ConstantCurvature:
      return kappa_;
    case MetricKind::Perturbed: {
      // K = -(lap lambda) / c; lap of the unperturbed part equals -kappa * c0.
      double q = 1.0 + kappa_ * (x * x + y * y);
      double c0 = 4.0 / (q * q);
      double lap_lambda = -kappa_ * c0 + 0.5 * epsilon_ * bump_laplacian(x, y);
      return -lap_lambda / conformal_factor(x, y);
    }
  }
  return 0.0;
}

void MetricModel::geodesic_rhs(double x, double y, double theta, double out[3]) const {
  double ct = std::cos(theta), st = std::sin(theta);
  switch (kind_) {
    case MetricKind::Euclidean: {
      out[0] = ct;
      out[1] = st;
      out[2] = 0.0;
      return;
    }
    case MetricKind::ConstantCurvature: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      double einv = 0.5 * q;
      double lx = -2.0 * kappa_ * x / q, ly = -2.0 * kappa_ * y / q;
      out[0] = einv * ct;
      out[1] = einv * st;
      out[2] = einv * (-lx * st + ly * ct);
      return;
    }
    case MetricKind::Perturbed: {
      double q = 1.0 + kappa_ * (x * x + y * y);
      double b = bump_value(x, y);
      double einv = 0.5 * q * std::exp(-0.5 * epsilon_ * b);
      double bx, by;
      bump_grad(x, y, bx, by);
      double lx = -2.0 * kappa_ * x / q + 0.5 * epsilon_ * bx;
      double ly = -2.0 * kappa_ * y / q + 0.5 * epsilon_ * by;
      out[0] = einv * ct;
      out[1] = einv * st;
      out[2] = einv * (-lx * st + ly * ct);
      return;
    }
  }
}

std::string MetricModel::describe() const {
  char buf[160];
  switch (kind_) {
    case MetricKind::Euclidean:
      std::snprintf(buf, sizeof buf, "euclidean(radius=%g)", radius_);
      break;
    case MetricKind::ConstantCurvature:
      std::snprintf(buf, sizeof buf, "constant_curvature(kappa=%g, radius=%g)", kappa_,
                    radius_);
      break;
    case MetricKind::Perturbed:
      std::snprintf(buf, sizeof buf,
                    "perturbed(kappa=%g, radius=%g, epsilon=%g, bump=[%g,%g,s=%g,A=%g])",
                    kappa_, radius_, epsilon_, bump_.cx, bump_.cy, bump_.sigma,
                    bump_.amplitude);
      break;
  }
  return buf;
}

}  // namespace grt
