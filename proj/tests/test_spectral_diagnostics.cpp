#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "rkdecouple/errors.hpp"
#include "rkdecouple/spectral_diagnostics.hpp"
#include "rkdecouple/time_integrators.hpp"

using namespace rkdecouple;
using cd = std::complex<double>;

namespace {

CoupledSystem scalar_system(double a, double b, double c, double d) {
  CoupledSystem s;
  s.n_u = s.n_p = 1;
  s.A = std::make_shared<SpdOperator>(Eigen::MatrixXd::Constant(1, 1, a));
  s.B = std::make_shared<SpdOperator>(Eigen::MatrixXd::Constant(1, 1, b));
  s.C = std::make_shared<SpdOperator>(Eigen::MatrixXd::Constant(1, 1, c));
  s.D = Eigen::MatrixXd::Constant(1, 1, d).sparseView();
  return s;
}

}  // namespace

TEST_CASE("L(zeta) special cases") {
  const auto ms = make_dense_surrogate(6, 5, 0.0, 1);
  const double tau = 0.1;
  const Eigen::MatrixXcd L = assemble_L_zeta(ms.system, radau_iia(1), make_delay_scheme(1), tau, 0.0);
  const Eigen::MatrixXd ref = Eigen::MatrixXd(ms.system.B->matrix()) + Eigen::MatrixXd(ms.system.C->matrix()) / tau;
  CHECK((L - ref.cast<cd>()).cwiseAbs().maxCoeff() < 1e-13);

  const auto s1 = scalar_system(2.0, 0.7, 1.3, 0.9);
  const double m = 0.81 / 2.0;
  for (double th = 0.0; th < 6.3; th += 0.5) {
    const cd z = std::polar(0.9, th);
    const cd expect = 0.7 + (1.0 - z) * (1.3 + z * m) / tau;
    CHECK(std::abs(assemble_L_zeta(s1, radau_iia(1), make_delay_scheme(1), tau, z)(0, 0) - expect) < 1e-13);
  }
  CHECK_THROWS_AS(assemble_L_zeta(ms.system, radau_iia(1), make_delay_scheme(1), tau, 0.0, 3), DomainError);
}

TEST_CASE("Y(zeta) quadratic form never vanishes under weak coupling") {
  const int k = 3;
  const auto ms = make_dense_surrogate(8, 8, 0.8 * weak_coupling_bound(k), 2);
  const auto& s = ms.system;
  const Eigen::MatrixXd B(s.B->matrix()), C(s.C->matrix());
  const Eigen::MatrixXd M = dense_schur(s);
  const auto tab = radau_iia(2);
  const auto del = make_delay_scheme(k);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N;
  for (int i = 0; i < 32; ++i) {
    const cd z = std::polar(std::sqrt(U(rng)), 2.0 * M_PI * U(rng));
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(delta_operator(tab, z));
    Eigen::VectorXd q(8);
    for (auto& v : q) v = N(rng);
    const double mu = q.dot(M * q) / q.dot(C * q);
    const cd w = 1.0 + mu * delay_symbol(del, z);
    CHECK(w.real() > 0.0);
    for (const cd lambda : es.eigenvalues()) {
      CHECK(lambda.real() >= -1e-12);
      // <Y q, q> = b(q,q) + lambda w c(q,q) / tau
      const cd form = q.dot(B * q) + lambda * w * q.dot(C * q) / 0.1;
      CHECK(std::abs(form) > 0.0);
    }
    CHECK(sigma_min(assemble_L_zeta(s, tab, del, 0.1, z)) > 0.0);
  }
}

TEST_CASE("sweep without coupling is bounded below by the diffusion block") {
  const auto ms = make_dense_surrogate(10, 10, 0.0, 3);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(ms.system.B->matrix())};
  SweepOptions o;
  o.n_samples = 180;
  const auto pr = l_zeta_sweep(ms.system, radau_iia(1), make_delay_scheme(1), 0.1, o);
  CHECK(pr.min_sigma >= es.eigenvalues().minCoeff() - 1e-12);
  CHECK(pr.theta.size() == 180);
  CHECK(pr.sigma_min.size() == 180);
  CHECK(pr.delta_min_re_eig.size() == 180);
}

TEST_CASE("sweep below the coupling bound stays invertible") {
  for (int s = 1; s <= 3; ++s) {
    const int k = 2 * s - 1;
    const auto ms = make_dense_surrogate(10, 10, 0.9 * weak_coupling_bound(k), 5);
    SweepOptions o;
    o.n_samples = 240;
    const auto pr = l_zeta_sweep(ms.system, radau_iia(s), make_delay_scheme(k), 0.1, o);
    CHECK(pr.min_sigma > 0.0);
    for (double v : pr.delta_min_re_eig) CHECK(v >= -1e-10);
    for (double v : pr.re_one_plus_mu_delta) CHECK(v > 0.0);
  }
}

TEST_CASE("invertibility degrades towards the coupling bound") {
  for (int s = 1; s <= 3; ++s) {
    const int k = 2 * s - 1;
    double prev = 1e300;
    for (double frac : {0.5, 0.9, 0.99}) {
      const auto ms = make_dense_surrogate(10, 10, frac * weak_coupling_bound(k), 6);
      const double sig = sigma_min(assemble_L_zeta(ms.system, radau_iia(s), make_delay_scheme(k), 0.1, -1.0));
      CHECK(sig > 0.0);
      CHECK(sig < prev);
      prev = sig;
    }
  }
}

TEST_CASE("contraction rate formulas") {
  CHECK(contraction_rate_fs(0.3, 0.15) == doctest::Approx(0.3 / 2.3));
  CHECK(contraction_rate_fs(0.3, 0.0) == doctest::Approx(0.3));
  CHECK(contraction_rate_fs(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(contraction_rate_us(0.3, 0.5) == doctest::Approx(0.3 / 2.3));
  CHECK(contraction_rate_us(0.3, 0.0) == doctest::Approx(0.3));
  CHECK(contraction_rate_us(0.01, 1.0) == doctest::Approx(0.01 / 1.01));
}

TEST_CASE("fixed-stress rate is below one exactly above the threshold") {
  for (double w = 0.0; w <= 4.0; w += 0.25) {
    const double thr = std::max(0.0, (w - 1.0) / 2.0);
    for (double L = 0.0; L <= 3.0; L += 0.125) {
      if (std::abs(L - thr) < 1e-12) continue;
      CHECK((contraction_rate_fs(w, L) < 1.0) == (L > thr));
    }
    if (thr > 0.0) {
      CHECK(contraction_rate_fs(w, thr + 1e-9) < 1.0);
      CHECK(contraction_rate_fs(w, thr - 1e-9) >= 1.0);
    }
  }
}

TEST_CASE("undrained-split rate below one") {
  for (double w = 0.1; w <= 4.0; w += 0.3)
    for (double L = 0.0; L <= 2.0; L += 0.1) {
      if (L < 0.5 && std::abs(w * (1.0 - 2.0 * L) - 1.0) < 1e-9) continue;
      const bool expect = L >= 0.5 || w * (1.0 - 2.0 * L) < 1.0;
      CHECK((contraction_rate_us(w, L) < 1.0) == expect);
    }
}

TEST_CASE("optimal rates coincide") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double w = U(rng);
    CHECK(std::abs(contraction_rate_fs(w, w / 2) - w / (2 + w)) < 1e-15);
    CHECK(std::abs(contraction_rate_us(w, 0.5) - w / (2 + w)) < 1e-15);
  }
}

TEST_CASE("rate estimation") {
  std::vector<std::pair<double, double>> r1, r3;
  for (int l = 1; l <= 6; ++l) {
    const double t = std::ldexp(1.0, -l);
    r1.emplace_back(t, 3.0 * t);
    r3.emplace_back(t, 0.2 * t * t * t);
  }
  CHECK(std::abs(estimate_rate(r1).slope - 1.0) < 1e-12);
  CHECK(std::abs(estimate_rate(r3).slope - 3.0) < 1e-12);
  CHECK(estimate_rate(r3).residual < 1e-12);
  auto bad = r1;
  bad[2].second = 0.0;
  CHECK(estimate_rate(bad).used == 5);
  CHECK_THROWS_AS(estimate_rate({{0.5, 1.0}, {0.25, 0.5}}), DomainError);
  CHECK_THROWS_AS(estimate_rate({{0.5, 1.0}, {0.25, -1.0}, {0.125, 0.0}, {0.0625, 0.1}}), DomainError);
}

TEST_CASE("convergence report") {
  ConvergenceReport rep;
  rep.tau = {0.5, 0.25, 0.125, 0.0625};
  rep.add_column("p", {0.5, 0.25, 0.125, 0.0625});
  rep.validate();
  REQUIRE(rep.fits.size() == 1);
  CHECK(rep.fits[0].slope == doctest::Approx(1.0));
  rep.tau = {0.5, 0.25, 0.1, 0.05};
  CHECK_THROWS_AS(rep.validate(), DomainError);
}

TEST_CASE("monolithic radau-iia-2 slope on the dense surrogate") {
  const auto ms = make_dense_surrogate(20, 20, 0.1, 23);
  SchemeConfig ref;
  ref.tableau = radau_iia(3);
  RunOptions keep;
  keep.keep_trajectory = true;
  const auto rr = run(ms.system, ref, std::ldexp(1.0, -10), 1.0, nullptr, keep);
  const auto look = trajectory_lookup(rr.u_traj, rr.p_traj, std::ldexp(1.0, -10));
  SchemeConfig c;
  c.tableau = radau_iia(2);
  std::vector<std::pair<double, double>> rows;
  for (int l = 2; l <= 6; ++l) {
    const double tau = std::ldexp(1.0, -l);
    rows.emplace_back(tau, run(ms.system, c, tau, 1.0, &look).max_err_p);
  }
  const double slope = estimate_rate(rows).slope;
  CHECK(slope >= 2.75);
  CHECK(slope <= 3.25);
}

TEST_CASE("generating function inversion reproduces the time-domain sequence") {
  const int N = 8, Ms = 64;
  for (int st = 1; st <= 3; ++st) {
    const int k = 2 * st - 1;
    const auto tab = radau_iia(st);
    const auto del = make_delay_scheme(k);
    auto ms = make_dense_surrogate(6, 6, 0.5 * weak_coupling_bound(k), 31);
    auto& sys = ms.system;
    const double tau = 0.1, cut = N * tau * (1.0 + 1e-12);
    sys.u0.setZero();
    sys.p0.setZero();
    sys.forcing_f = [cut](double t) { return t <= cut ? Eigen::VectorXd(Eigen::VectorXd::LinSpaced(6, 1.0, 2.0) * (1.0 + t)) : Eigen::VectorXd::Zero(6); };
    sys.forcing_g = [cut](double t) { return t <= cut ? Eigen::VectorXd(Eigen::VectorXd::Constant(6, t * t - 0.5)) : Eigen::VectorXd::Zero(6); };

    SemiExplicitStepper stepper(sys, tab, del, tau, HistoryInit::exact_solution);
    TrajectoryState state = initial_state(sys);
    state.history_capacity = static_cast<std::size_t>(k);
    for (int d = 0; d < k; ++d) state.pressure_history.push_back(StageVector::Zero(6, st));
    std::vector<StageVector> seq;
    for (int n = 0; n < 40 * Ms; ++n) {
      stepper.step(state);
      seq.push_back(state.pressure_history.front());
    }
    StageSequenceData data;
    for (int n = 1; n <= N; ++n) {
      StageVector F(6, st), G(6, st);
      for (int l = 0; l < st; ++l) {
        F.col(l) = sys.forcing_f((n - 1 + tab.c[l]) * tau);
        G.col(l) = sys.forcing_g((n - 1 + tab.c[l]) * tau);
      }
      data.F.push_back(F);
      data.G.push_back(G);
    }
    data.history.assign(k, StageVector::Zero(6, st));
    data.u0 = Eigen::VectorXd::Zero(6);
    data.p0 = Eigen::VectorXd::Zero(6);
    const auto rec = reconstruct_pressure_sequence(sys, tab, del, tau, data, N, Ms);
    for (int n = 1; n <= N; ++n) {
      StageVector aliased = StageVector::Zero(6, st);
      for (int j = 0; n + j * Ms <= static_cast<int>(seq.size()); ++j) aliased += seq[n - 1 + j * Ms];
      CHECK((rec[n - 1] - aliased).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}
