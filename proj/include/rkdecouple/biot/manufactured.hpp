#pragma once

#include <Eigen/Dense>

namespace rkdecouple::biot {

/// Material data of the quasi-static Biot model
///   -div(mu (grad u + grad u^T) + lambda div(u) I) + alpha grad p = f,
///   d/dt (alpha div u + p / M) - div(kappa_over_nu grad p) = g.
struct BiotParameters {
  double lambda = 1.0;
  double mu = 0.5;
  double kappa_over_nu = 0.1;
  double biot_modulus = 1.0;  // M
  double alpha = 0.1;

  /// Throws DomainError when a parameter is outside its admissible range.
  void validate() const;
};

/// Smooth decaying solution on the unit square, vanishing on the boundary:
///   u = -exp(-a t) (s, s),  p = exp(-a t) s,  s = sin(pi x) sin(pi y),
/// with a = 2 pi^2 kappa_over_nu / (alpha + 1/M).
class ManufacturedProblem {
 public:
  explicit ManufacturedProblem(const BiotParameters& params);

  const BiotParameters& params() const { return params_; }
  double decay_rate() const { return decay_; }
  /// exp(-a t): every field and forcing term is this factor times its value at t = 0.
  double time_factor(double t) const;

  Eigen::Vector2d u(double t, double x, double y) const;
  double p(double t, double x, double y) const;
  Eigen::Vector2d forcing_f(double t, double x, double y) const;
  double forcing_g(double t, double x, double y) const;

 private:
  BiotParameters params_;
  double decay_;
};

}  // namespace rkdecouple::biot
