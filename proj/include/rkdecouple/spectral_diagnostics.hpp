#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "rkdecouple/coupled_system.hpp"
#include "rkdecouple/delay.hpp"
#include "rkdecouple/rk_tableau.hpp"

namespace rkdecouple {

/// I (x) B + Delta(zeta)/tau (x) (C + delta_k(zeta) M), with M = D A^{-1} D^T formed densely.
/// Throws DomainError when n_p > max_dim.
Eigen::MatrixXcd assemble_L_zeta(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay,
                                 double tau, std::complex<double> zeta, Eigen::Index max_dim = 200);

/// Unit-circle sweep. theta is the uniform grid 2 pi j / n; the refined_* arrays hold extra samples
/// at a quarter of the grid spacing within two grid cells of theta = pi.
struct SpectralProbe {
  double mu = 0.0;  // coupling strength used for the delay-symbol column
  std::vector<double> theta;
  std::vector<double> sigma_min;
  std::vector<double> delta_min_re_eig;
  std::vector<double> re_one_plus_mu_delta;
  std::vector<double> refined_theta;
  std::vector<double> refined_sigma_min;
  double min_sigma = 0.0;
  double argmin_theta = 0.0;
};

struct SweepOptions {
  int n_samples = 720;
  bool refine_near_pi = true;
  Eigen::Index max_dim = 200;
};

SpectralProbe l_zeta_sweep(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay, double tau,
                           const SweepOptions& opts = {});

/// Smallest singular value of a dense complex matrix.
double sigma_min(const Eigen::MatrixXcd& M);

/// max(L, omega - L) / (1 + L).
double contraction_rate_fs(double omega, double L);
/// omega max(L, 1 - L) / (1 + L omega).
double contraction_rate_us(double omega, double L);

struct RateFit {
  double slope = 0.0;
  double residual = 0.0;  // max deviation of log(error) from the fitted line
  int used = 0;
};

/// Least-squares slope of log(error) against log(tau). Rows with non-positive error are skipped
/// with a warning on stderr; fewer than 3 usable rows throws DomainError.
RateFit estimate_rate(const std::vector<std::pair<double, double>>& rows);

/// Error table over a geometric tau sequence, one column per quantity, with fitted slopes.
struct ConvergenceReport {
  std::vector<double> tau;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> errors;  // errors[column][tau index]
  std::vector<RateFit> fits;

  void add_column(std::string name, std::vector<double> errs);
  /// Throws DomainError unless tau is strictly decreasing with constant ratio.
  void validate() const;
};

/// Data of a short semi-explicit run in stage form: F[n-1], G[n-1] are the stage loads of step n,
/// history[d-1] is the pressure stage value P^{1-d}.
struct StageSequenceData {
  std::vector<StageVector> F;
  std::vector<StageVector> G;
  std::vector<StageVector> history;
  Eigen::VectorXd u0;
  Eigen::VectorXd p0;
};

/// Right-hand side R(zeta) of the frequency-domain relation L(zeta) P(zeta) = R(zeta), with
/// P(zeta) = sum_{n>=1} P^n zeta^n (stages stacked stage-major).
Eigen::VectorXcd assemble_R_zeta(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay,
                                 double tau, std::complex<double> zeta, const StageSequenceData& data);

/// Recovers P^1..P^n_steps by trapezoidal inversion of L(zeta)^{-1} R(zeta) on n_samples points of
/// the unit circle. The result for step n equals sum_j P^{n + j n_samples}.
std::vector<StageVector> reconstruct_pressure_sequence(const CoupledSystem& sys, const ButcherTableau& tab,
                                                       const DelayScheme& delay, double tau,
                                                       const StageSequenceData& data, int n_steps,
                                                       int n_samples);

}  // namespace rkdecouple
