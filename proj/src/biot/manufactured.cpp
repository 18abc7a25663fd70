#include "rkdecouple/biot/manufactured.hpp"

#include <cmath>
#include <numbers>

#include "rkdecouple/errors.hpp"

namespace rkdecouple::biot {

namespace {
constexpr double pi = std::numbers::pi;
}

void BiotParameters::validate() const {
  if (!(mu > 0.0)) throw DomainError("Biot parameters: mu must be > 0");
  if (!(lambda >= 0.0)) throw DomainError("Biot parameters: lambda must be >= 0");
  if (!(kappa_over_nu > 0.0)) throw DomainError("Biot parameters: kappa must be > 0");
  if (!(biot_modulus > 0.0)) throw DomainError("Biot parameters: M must be > 0");
  if (!(alpha >= 0.0)) throw DomainError("Biot parameters: alpha must be >= 0");
}

ManufacturedProblem::ManufacturedProblem(const BiotParameters& params) : params_(params) {
  params_.validate();
  decay_ = 2.0 * pi * pi * params_.kappa_over_nu / (params_.alpha + 1.0 / params_.biot_modulus);
}

double ManufacturedProblem::time_factor(double t) const { return std::exp(-decay_ * t); }

Eigen::Vector2d ManufacturedProblem::u(double t, double x, double y) const {
  const double v = -time_factor(t) * std::sin(pi * x) * std::sin(pi * y);
  return {v, v};
}

double ManufacturedProblem::p(double t, double x, double y) const {
  return time_factor(t) * std::sin(pi * x) * std::sin(pi * y);
}

Eigen::Vector2d ManufacturedProblem::forcing_f(double t, double x, double y) const {
  const double s = std::sin(pi * x) * std::sin(pi * y);
  const double cc = std::cos(pi * x) * std::cos(pi * y);
  const double sx = pi * std::cos(pi * x) * std::sin(pi * y);
  const double sy = pi * std::sin(pi * x) * std::cos(pi * y);
  const auto& q = params_;
  const double elastic = -pi * pi * (2.0 * q.mu * s + (q.mu + q.lambda) * (s - cc));
  const double e = time_factor(t);
  return {e * (elastic + q.alpha * sx), e * (elastic + q.alpha * sy)};
}

double ManufacturedProblem::forcing_g(double t, double x, double y) const {
  const double s = std::sin(pi * x) * std::sin(pi * y);
  const double sx = pi * std::cos(pi * x) * std::sin(pi * y);
  const double sy = pi * std::sin(pi * x) * std::cos(pi * y);
  const auto& q = params_;
  const double a = decay_;
  return time_factor(t) *
         (q.alpha * a * (sx + sy) - a / q.biot_modulus * s + 2.0 * pi * pi * q.kappa_over_nu * s);
}

}  // namespace rkdecouple::biot
