#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "rkdecouple/delay.hpp"
#include "rkdecouple/errors.hpp"

using namespace rkdecouple;
using cd = std::complex<double>;

namespace {
long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

TEST_CASE("delay coefficients") {
  CHECK(delay_coefficients(1) == std::vector<long long>{1});
  CHECK(delay_coefficients(2) == std::vector<long long>{2, -1});
  CHECK(delay_coefficients(3) == std::vector<long long>{3, -3, 1});
  for (int k = 1; k <= 10; ++k) {
    const auto c = delay_coefficients(k);
    REQUIRE(c.size() == static_cast<std::size_t>(k));
    long long sum = 0;
    for (int d = 1; d <= k; ++d) {
      CHECK(c[d - 1] == ((d - 1) % 2 ? -1 : 1) * binom(k, d));
      sum += c[d - 1];
    }
    CHECK(sum == 1);
  }
  CHECK_THROWS_AS(delay_coefficients(0), DomainError);
  CHECK_THROWS_AS(delay_coefficients(11), DomainError);
}

TEST_CASE("delay symbol values") {
  for (int k = 1; k <= 6; ++k) CHECK(std::abs(delay_symbol(make_delay_scheme(k), 1.0) - 1.0) < 1e-15);
  CHECK(std::abs(delay_symbol(make_delay_scheme(2), -1.0) - (-3.0)) < 1e-14);
  CHECK(std::abs(delay_symbol(make_delay_scheme(5), -1.0) - (-31.0)) < 1e-13);
}

TEST_CASE("power sum and closed form agree in the unit disc") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 1; k <= 8; ++k) {
    const auto sch = make_delay_scheme(k);
    for (int i = 0; i < 256; ++i) {
      const cd z = std::polar(std::sqrt(U(rng)), 2.0 * M_PI * U(rng));
      CHECK(std::abs(delay_symbol_power_sum(sch, z) - delay_symbol(sch, z)) < 1e-12);
    }
  }
}

TEST_CASE("weak coupling bound") {
  CHECK(weak_coupling_bound(1) == doctest::Approx(1.0));
  CHECK(weak_coupling_bound(3) == doctest::Approx(1.0 / 7));
  CHECK(weak_coupling_bound(5) == doctest::Approx(1.0 / 31));
}

TEST_CASE("minimum real part scan") {
  CHECK(min_real_part_scan(0.0, 3, 64).min_value == doctest::Approx(1.0));
  const auto r = min_real_part_scan(1.0 / 7.0, 3, 4096);
  CHECK(std::abs(r.min_value) < 1e-8);
  CHECK(std::abs(r.argmin_theta - M_PI) <= 2.0 * M_PI / 4096);
  const auto h = min_real_part_scan(0.5 / 31.0, 5, 4096);
  CHECK(std::abs(h.min_value - 0.5) < 1e-8);
  CHECK_THROWS(min_real_part_scan(0.1, 2, 4));
}

TEST_CASE("scan is non-increasing in the coupling strength") {
  for (int k = 1; k <= 5; ++k) {
    const double b = weak_coupling_bound(k);
    const double m1 = min_real_part_scan(0.2 * b, k, 1000).min_value;
    const double m2 = min_real_part_scan(0.6 * b, k, 1000).min_value;
    const double m3 = min_real_part_scan(0.95 * b, k, 1000).min_value;
    CHECK(m1 >= m2);
    CHECK(m2 >= m3);
  }
}

TEST_CASE("grid minimum approaches the analytic value under refinement") {
  // an odd sample count misses theta = pi
  const double mu = 0.7 / 7.0, exact = 1.0 - mu * 7.0;
  double prev = std::abs(min_real_part_scan(mu, 3, 101).min_value - exact);
  for (int n : {201, 401, 801}) {
    const double err = std::abs(min_real_part_scan(mu, 3, n).min_value - exact);
    CHECK(err < prev);
    CHECK(err < 0.3 * prev);
    prev = err;
  }
}
