#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rkdecouple/biot/assembly.hpp"
#include "rkdecouple/errors.hpp"
#include "rkdecouple/experiments.hpp"
#include "rkdecouple/spectral_diagnostics.hpp"
#include "rkdecouple/time_integrators.hpp"

using namespace rkdecouple;
namespace ex = rkdecouple::experiments;
using cd = std::complex<double>;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double slope_of(const CsvTable& t, const std::string& scheme, const std::string& tableau) {
  for (const auto& r : t.rows)
    if (r[1] == scheme && r[2] == tableau && r[4] == "slope") return std::stod(r[6]);
  throw DomainError("missing slope row");
}

// 1
Outcome dense_orders() {
  Outcome o;
  ex::ExperimentConfig c;
  c.dense_size = 40;
  c.seed = 42;
  c.tau_max = 0.25;
  c.tau_levels = 6;
  const auto t = ex::cmd_converge(c).table;
  for (const std::string scheme : {"monolithic", "semi-explicit"}) {
    const double s1 = slope_of(t, scheme, "radau-iia-1");
    const double s2 = slope_of(t, scheme, "radau-iia-2");
    const double s3 = slope_of(t, scheme, "radau-iia-3");
    o.note(scheme + " slopes " + num(s1) + "/" + num(s2) + "/" + num(s3));
    o.require(std::abs(s1 - 1.0) <= 0.15, scheme + " radau-iia-1 slope");
    o.require(std::abs(s2 - 3.0) <= 0.3, scheme + " radau-iia-2 slope");
    if (scheme == "semi-explicit") o.require(s3 >= 4.0, "semi-explicit radau-iia-3 slope >= 4");
  }
  return o;
}

// 2
Outcome contraction() {
  Outcome o;
  ex::ExperimentConfig c;
  c.omegas = {0.01, 0.2, 0.8};
  c.stabilizations = {0.0, std::nullopt, 1.0};
  c.iteration_start = IterationStart::consistent;
  const auto r = ex::cmd_contract(c);
  double worst = -1e300;
  int checked = 0;
  for (const auto& row : r.table.rows) {
    if (row[6].empty() || row[6] == "nan") continue;
    const double ratio = std::stod(row[6]), bound = std::stod(row[7]);
    if (bound >= 1.0) continue;
    ++checked;
    worst = std::max(worst, ratio - bound);
  }
  o.note(std::to_string(checked) + " ratios, max(ratio - bound) " + num(worst));
  o.require(r.status == ex::exit_ok, "contract status " + std::to_string(r.status));
  o.require(checked > 0, "ratios recorded");
  for (double w : {0.01, 0.2, 0.8}) {
    const double target = w / (2.0 + w);
    o.require(std::abs(contraction_rate_fs(w, w / 2.0) - target) <= 1e-12, "fixed-stress optimal rate formula");
    o.require(std::abs(contraction_rate_us(w, 0.5) - target) <= 1e-12, "undrained-split optimal rate formula");
  }
  return o;
}

// 3
Outcome boundary_scan() {
  Outcome o;
  const int n = 4096;
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const auto del = make_delay_scheme(k);
    for (double frac : {0.5, 0.9, 1.0}) {
      const double mu = frac * weak_coupling_bound(k);
      double best = 1e300;
      int arg = -1;
      for (int j = 0; j < n; ++j) {
        const double v = (1.0 + mu * delay_symbol(del, std::polar(1.0, 2.0 * M_PI * j / n))).real();
        if (v < best) best = v, arg = j;
      }
      const double expect = 1.0 - mu * (std::pow(2.0, k) - 1.0);
      worst = std::max(worst, std::abs(best - expect));
      o.require(std::abs(best - expect) <= 1e-8, "k=" + std::to_string(k) + " minimum value");
      o.require(std::abs(2.0 * M_PI * arg / n - M_PI) <= 2.0 * M_PI / n + 1e-14, "k=" + std::to_string(k) + " minimizer");
    }
  }
  o.note("max deviation " + num(worst));
  return o;
}

// 4
Outcome delta_sector() {
  Outcome o;
  double worst_eig = 1e300, worst_id = 0.0;
  for (int s = 1; s <= 3; ++s) {
    const auto tab = radau_iia(s);
    const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(s);
    for (int j = 0; j < 720; ++j) {
      const cd z = std::polar(1.0, 2.0 * M_PI * j / 720.0);
      const Eigen::MatrixXcd D = delta_operator(tab, z);
      worst_eig = std::min(worst_eig, Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(D).eigenvalues().real().minCoeff());
      if (j == 0) continue;
      const Eigen::MatrixXcd def = tab.A.cast<cd>() + (z / (1.0 - z)) * one * tab.b.cast<cd>().transpose();
      worst_id = std::max(worst_id, (D * def - Eigen::MatrixXcd::Identity(s, s)).cwiseAbs().maxCoeff());
      const Eigen::VectorXcd lhs = D * one / (1.0 - z);
      const Eigen::VectorXcd rhs = tab.A_inv.cast<cd>() * one / (1.0 - tab.r_infinity * z);
      worst_id = std::max(worst_id, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  o.note("min Re eig " + num(worst_eig) + ", identity residual " + num(worst_id));
  o.require(worst_eig >= -1e-10, "eigenvalue sector");
  o.require(worst_id <= 1e-11, "identities");
  return o;
}

// 5
Outcome generating_function() {
  Outcome o;
  const int N = 8, Ms = 64;
  double worst = 0.0;
  for (int st = 1; st <= 3; ++st) {
    const int k = 2 * st - 1;
    const auto tab = radau_iia(st);
    const auto del = make_delay_scheme(k);
    auto ms = make_dense_surrogate(6, 6, 0.5 * weak_coupling_bound(k), 17);
    auto& sys = ms.system;
    const double tau = 0.1, cut = N * tau * (1.0 + 1e-12);
    sys.u0.setZero();
    sys.p0.setZero();
    sys.forcing_f = [cut](double t) {
      return t <= cut ? Eigen::VectorXd(Eigen::VectorXd::LinSpaced(6, -1.0, 1.0) * std::cos(t)) : Eigen::VectorXd::Zero(6);
    };
    sys.forcing_g = [cut](double t) {
      return t <= cut ? Eigen::VectorXd(Eigen::VectorXd::Constant(6, 1.0 + t)) : Eigen::VectorXd::Zero(6);
    };

    // time domain: forcing vanishes after step N, so the tail decays and the aliased sum converges
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
      worst = std::max(worst, (rec[n - 1] - aliased).cwiseAbs().maxCoeff());
    }
  }
  o.note("max deviation " + num(worst));
  o.require(worst <= 1e-8, "round trip");
  return o;
}

// 6
Outcome invertibility() {
  Outcome o;
  for (int st = 1; st <= 3; ++st) {
    const int k = 2 * st - 1;
    std::vector<double> sig;
    for (double frac : {0.5, 0.9, 0.99}) {
      const auto ms = make_dense_surrogate(20, 20, frac * weak_coupling_bound(k), 42);
      sig.push_back(sigma_min(assemble_L_zeta(ms.system, radau_iia(st), make_delay_scheme(k), 0.1, -1.0)));
    }
    o.note("s=" + std::to_string(st) + ": " + num(sig[0]) + " > " + num(sig[1]) + " > " + num(sig[2]));
    o.require(sig[2] > 0.0, "positivity s=" + std::to_string(st));
    o.require(sig[0] > sig[1] && sig[1] > sig[2], "strict decrease s=" + std::to_string(st));
  }
  return o;
}

double biot_slope(const ManufacturedSystem& ms, int st, int l0, int l1) {
  SchemeConfig cfg;
  cfg.kind = SchemeKind::semi_explicit;
  cfg.tableau = radau_iia(st);
  cfg.delay = make_delay_scheme(2 * st - 1);
  cfg.history_init = HistoryInit::exact_solution;
  std::vector<std::pair<double, double>> rows;
  for (int l = l0; l <= l1; ++l) {
    const double tau = std::ldexp(1.0, -l);
    rows.emplace_back(tau, run(ms.system, cfg, tau, 1.0, &ms.exact).max_err_p);
  }
  return estimate_rate(rows).slope;
}

// 7
Outcome biot_reproduction() {
  Outcome o;
  const biot::BiotParameters prm;
  const biot::ManufacturedProblem prob(prm);
  const auto disc = biot::assemble_biot(biot::build_mesh(64), prm, 2, 1);
  const auto ms = biot::make_biot_system(disc, prob);
  const double w = coupling_strength(ms.system, 1e-6);
  const double s1 = biot_slope(ms, 1, 2, 6);
  const double s2 = biot_slope(ms, 2, 1, 4);
  o.note("omega " + num(w) + " (cap alpha^2 M/(2 mu + lambda) = " +
         num(prm.alpha * prm.alpha * prm.biot_modulus / (2 * prm.mu + prm.lambda)) + ")");
  o.note("radau-iia-1 slope " + num(s1) + ", radau-iia-2 slope " + num(s2));
  o.require(std::abs(s1 - 1.0) <= 0.15, "radau-iia-1 slope");
  o.require(std::abs(s2 - 3.0) <= 0.35, "radau-iia-2 slope");
  o.require(w >= 0.005 && w <= 0.02, "coupling strength in [0.005, 0.02]");

  // diagnostics only: forcing that removes the spatial error
  const auto dsd = biot::assemble_biot(biot::build_mesh(16), prm, 2, 1);
  const auto msd = biot::make_biot_system(dsd, prob, biot::BiotForcing::semi_discrete);
  o.note("semi-discrete forcing n=16: radau-iia-2 slope " + num(biot_slope(msd, 2, 1, 4)));
  return o;
}

// 8
Outcome iteration_counts() {
  Outcome o;
  const std::map<std::string, std::vector<double>> table = {
      {"fixed-stress,radau-iia-1", {2.44, 2.69, 2.92, 3.00}},
      {"fixed-stress,radau-iia-2", {3.00, 3.00, 4.00, 4.00}},
      {"fixed-stress,radau-iia-3", {4.00, 4.00, 5.00, 6.00}},
      {"undrained-split,radau-iia-1", {2.38, 2.97, 3.00, 3.00}},
      {"undrained-split,radau-iia-2", {3.00, 3.00, 4.00, 4.00}},
      {"undrained-split,radau-iia-3", {4.00, 4.00, 5.00, 6.00}},
  };
  ex::ExperimentConfig c;
  c.backend = ex::Backend::biot_fem;
  c.mesh = 64;
  c.schemes = {SchemeKind::fixed_stress, SchemeKind::undrained_split};
  c.tau_max = 1.0 / 16.0;
  c.tau_levels = 4;
  const auto r = ex::cmd_iterate_counts(c);
  std::map<std::string, std::vector<double>> got;
  for (const auto& row : r.table.rows) got[row[0] + "," + row[1]].push_back(std::stod(row[3]));
  for (const auto& [key, want] : table) {
    const auto& have = got[key];
    std::string s;
    for (double v : have) s += (s.empty() ? "" : " ") + num(v);
    o.note(key + ": " + s);
    if (have.size() != want.size()) {
      o.require(false, key + " row count");
      continue;
    }
    for (std::size_t i = 0; i < want.size(); ++i) o.require(std::abs(have[i] - want[i]) <= 2.0, key + " within 2");
    for (std::size_t i = 1; i < have.size(); ++i) o.require(have[i] >= have[i - 1], key + " non-decreasing");
  }
  return o;
}

// 9
Outcome coincidence() {
  Outcome o;
  const auto ms = make_dense_surrogate(20, 20, 0.0, 42);
  RunOptions keep;
  keep.keep_trajectory = true;
  double worst = 0.0;
  for (int st = 1; st <= 3; ++st) {
    std::vector<RunResult> runs;
    for (auto kind : {SchemeKind::monolithic, SchemeKind::semi_explicit, SchemeKind::fixed_stress,
                      SchemeKind::undrained_split}) {
      SchemeConfig c;
      c.kind = kind;
      c.tableau = radau_iia(st);
      if (kind == SchemeKind::semi_explicit) c.delay = make_delay_scheme(2 * st - 1);
      if (c.iterative()) {
        c.stabilization = kind == SchemeKind::fixed_stress ? 0.0 : 0.5;
        c.tol = 1e-13;
      }
      runs.push_back(run(ms.system, c, 0.05, 1.0, nullptr, keep));
    }
    for (std::size_t a = 0; a < runs.size(); ++a)
      for (std::size_t b = a + 1; b < runs.size(); ++b)
        for (std::size_t n = 0; n < runs[a].u_traj.size(); ++n)
          worst = std::max({worst, (runs[a].u_traj[n] - runs[b].u_traj[n]).norm(),
                            (runs[a].p_traj[n] - runs[b].p_traj[n]).norm()});
    o.require(runs[0].steps == 20, "20 steps");
  }
  o.note("max pairwise difference " + num(worst));
  o.require(worst <= 1e-11, "pairwise agreement");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dense temporal orders", dense_orders},
      {"contraction bounds", contraction},
      {"coupling boundary scan", boundary_scan},
      {"delta sector and identities", delta_sector},
      {"generating function round trip", generating_function},
      {"L(zeta) invertibility degradation", invertibility},
      {"Biot reproduction n=64", biot_reproduction},
      {"Biot iteration counts n=64", iteration_counts},
      {"decoupled scheme coincidence", coincidence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
