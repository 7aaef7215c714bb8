#pragma once
// Conformal metrics g = c(x,y) * (dx^2 + dy^2) on a closed disc of given radius:
// flat (c = 1), constant Gaussian curvature kappa (c = 4 / (1 + kappa r^2)^2),
// and the latter perturbed by a smooth compactly supported bump in log scale.

#include <string>

#include "grt/common.hpp"

namespace grt {

enum class MetricKind { Euclidean, ConstantCurvature, Perturbed };

// Gaussian bump tapered to vanish (with all low-order derivatives) at the rim:
//   b(x,y) = amplitude * exp(-|x-c0|^2 / (2 sigma^2)) * (1 - r^2/R^2)^3.
struct BumpSpec {
  double cx = 0.25, cy = -0.1;
  double sigma = 0.35;
  double amplitude = 1.0;
};

class MetricModel {
public:
  MetricModel() : MetricModel(MetricKind::Euclidean, 0.0, 1.0, 0.0, {}) {}

  static MetricModel euclidean(double radius = 1.0);
  static MetricModel constant_curvature(double kappa, double radius = 1.0);
  static MetricModel perturbed(double kappa, double radius, double epsilon,
                               const BumpSpec& bump = {});

  MetricKind kind() const { return kind_; }
  double radius() const { return radius_; }
  double kappa() const { return kappa_; }
  double epsilon() const { return epsilon_; }
  const BumpSpec& bump() const { return bump_; }

  double conformal_factor(double x, double y) const;  // c
  double log_factor(double x, double y) const;        // lambda = (1/2) log c
  // Safe lower bound for sqrt(c) over the closed disc (used for conservative
  // metric-distance-to-rim estimates).
  double min_sqrt_conformal() const;
  void log_factor_grad(double x, double y, double& lx, double& ly) const;
  double gauss_curvature(double x, double y) const;

  // Right side of the unit-speed geodesic equation in the angular chart
  // (x, y, theta):  x' = e^-l cos, y' = e^-l sin, th' = e^-l (-lx sin + ly cos).
  void geodesic_rhs(double x, double y, double theta, double out[3]) const;

  std::string describe() const;

private:
  MetricModel(MetricKind k, double kappa, double radius, double eps, const BumpSpec& b);

  double bump_value(double x, double y) const;
  void bump_grad(double x, double y, double& bx, double& by) const;
  double bump_laplacian(double x, double y) const;

  MetricKind kind_;
  double kappa_ = 0.0;
  double radius_ = 1.0;
  double epsilon_ = 0.0;
  BumpSpec bump_;
};

}  // namespace grt
