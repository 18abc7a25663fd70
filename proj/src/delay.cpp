#include "rkdecouple/delay.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

std::vector<long long> delay_coefficients(int k) {
  if (k < 1 || k > 10) throw DomainError("delay order k=" + std::to_string(k) + " outside 1..10");
  std::vector<long long> row{1};
  for (int n = 1; n <= k; ++n) {
    std::vector<long long> next(n + 1, 1);
    for (int j = 1; j < n; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  std::vector<long long> out(k);
  for (int d = 1; d <= k; ++d) out[d - 1] = (d % 2 == 1 ? 1 : -1) * row[d];
  return out;
}

DelayScheme make_delay_scheme(int k) {
  DelayScheme scheme;
  scheme.k = k;
  for (long long c : delay_coefficients(k)) scheme.coeffs.push_back(static_cast<double>(c));
  return scheme;
}

std::complex<double> delay_symbol(const DelayScheme& scheme, std::complex<double> zeta) {
  return 1.0 - std::pow(1.0 - zeta, scheme.k);
}

std::complex<double> delay_symbol_power_sum(const DelayScheme& scheme, std::complex<double> zeta) {
  std::complex<double> acc = 0.0, zp = 1.0;
  for (double c : scheme.coeffs) {
    zp *= zeta;
    acc += c * zp;
  }
  return acc;
}

double weak_coupling_bound(int k) {
  if (k < 1) throw DomainError("weak_coupling_bound: k must be >= 1");
  return 1.0 / (std::ldexp(1.0, k) - 1.0);
}

ScanResult min_real_part_scan(double mu, int k, int n_samples) {
  if (n_samples < 8) throw DomainError("min_real_part_scan: need at least 8 samples");
  if (mu < 0.0) throw DomainError("min_real_part_scan: mu must be non-negative");
  const DelayScheme scheme = make_delay_scheme(k);
  ScanResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (int j = 0; j < n_samples; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / n_samples;
    const double v = std::real(1.0 + mu * delay_symbol(scheme, std::polar(1.0, theta)));
    if (v < best.min_value) best = {v, theta};
  }
  return best;
}

}  // namespace rkdecouple
