#pragma once

#include <complex>
#include <vector>

namespace rkdecouple {

/// Order-k pressure extrapolation from the k previous steps.
struct DelayScheme {
  int k = 1;
  std::vector<double> coeffs;  // coeffs[d-1] multiplies the value d steps back
};

/// (-1)^(d-1) * binomial(k, d) for d = 1..k, exact integers. Requires 1 <= k <= 10.
std::vector<long long> delay_coefficients(int k);

DelayScheme make_delay_scheme(int k);

/// sum_d coeffs[d-1] zeta^d, returned through the closed form 1 - (1 - zeta)^k.
std::complex<double> delay_symbol(const DelayScheme& scheme, std::complex<double> zeta);

/// Power-sum evaluation of the same polynomial.
std::complex<double> delay_symbol_power_sum(const DelayScheme& scheme, std::complex<double> zeta);

/// 1 / (2^k - 1): largest coupling strength for which the delay scheme stays well posed.
double weak_coupling_bound(int k);

struct ScanResult {
  double min_value = 0.0;
  double argmin_theta = 0.0;
};

/// Minimum of Re(1 + mu * delta_k(e^{i theta})) on the grid theta_j = 2 pi j / n_samples.
ScanResult min_real_part_scan(double mu, int k, int n_samples);

}  // namespace rkdecouple
