#include "rkdecouple/time_integrators.hpp"

#include <cmath>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

namespace {

void append_block(std::vector<Eigen::Triplet<double>>& trips, const SparseMatrix& m, Eigen::Index r0,
                  Eigen::Index c0, double scale = 1.0) {
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(m, col); it; ++it)
      trips.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), scale * it.value());
}

SparseMatrix block2x2(const SparseMatrix& tl, const SparseMatrix& tr, const SparseMatrix& bl,
                      const SparseMatrix& br) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(tl.nonZeros() + tr.nonZeros() + bl.nonZeros() + br.nonZeros()));
  append_block(trips, tl, 0, 0);
  append_block(trips, tr, 0, tl.cols());
  append_block(trips, bl, tl.rows(), 0);
  append_block(trips, br, tl.rows(), tl.cols());
  SparseMatrix out(tl.rows() + bl.rows(), tl.cols() + tr.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd flatten(const StageVector& X) { return Eigen::Map<const Eigen::VectorXd>(X.data(), X.size()); }

StageVector unflatten(const Eigen::VectorXd& x, Eigen::Index n, Eigen::Index s) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), n, s);
}

// (1/tau) (A^{-1} (x) C) + I (x) B, size s n_p.
SparseMatrix flow_matrix(const CoupledSystem& sys, const ButcherTableau& tab, double factor) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(tab.s, tab.s);
  return kron(factor * tab.A_inv, sys.C->matrix()) + kron(I, sys.B->matrix());
}

std::string norm_history(const std::vector<double>& h) {
  std::string out;
  for (double v : h) out += (out.empty() ? "" : ", ") + std::to_string(v);
  return out;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::monolithic: return "monolithic";
    case SchemeKind::semi_explicit: return "semi-explicit";
    case SchemeKind::fixed_stress: return "fixed-stress";
    case SchemeKind::undrained_split: return "undrained-split";
  }
  return "unknown";
}

SchemeKind scheme_from_string(const std::string& name) {
  std::string n = name;
  for (char& ch : n)
    if (ch == '_') ch = '-';
  if (n == "monolithic") return SchemeKind::monolithic;
  if (n == "semi-explicit") return SchemeKind::semi_explicit;
  if (n == "fixed-stress") return SchemeKind::fixed_stress;
  if (n == "undrained-split") return SchemeKind::undrained_split;
  throw ConfigError("unknown scheme '" + name + "'");
}

void SchemeConfig::validate() const {
  if (kind == SchemeKind::semi_explicit) {
    if (!delay) throw ConfigError("semi-explicit scheme requires a delay order");
  } else if (delay) {
    throw ConfigError("delay order given for non semi-explicit scheme " + to_string(kind));
  }
  if (iterative()) {
    if (!stabilization) throw ConfigError(to_string(kind) + " requires a stabilization parameter");
    if (*stabilization < 0.0) throw ConfigError("stabilization must be >= 0");
    if (tol && !(*tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  } else if (stabilization || tol) {
    throw ConfigError("stabilization/tol given for non-iterative scheme " + to_string(kind));
  }
}

void TrajectoryState::push_stages(const StageVector& P) {
  if (history_capacity == 0) return;
  pressure_history.push_front(P);
  while (pressure_history.size() > history_capacity) pressure_history.pop_back();
}

TrajectoryState initial_state(const CoupledSystem& sys) {
  TrajectoryState st;
  st.u = sys.u0;
  st.p = sys.p0;
  return st;
}

Stepper::Stepper(const CoupledSystem& sys, ButcherTableau tab, double tau)
    : sys_(sys), tab_(std::move(tab)), tau_(tau) {
  if (!(tau > 0.0)) throw DomainError("time step must be positive");
}

StageVector Stepper::stage_f(double t) const {
  StageVector F(sys_.n_u, tab_.s);
  for (int l = 0; l < tab_.s; ++l) F.col(l) = sys_.forcing_f(t + tab_.c[l] * tau_);
  return F;
}

StageVector Stepper::stage_g(double t) const {
  StageVector G(sys_.n_p, tab_.s);
  for (int l = 0; l < tab_.s; ++l) G.col(l) = sys_.forcing_g(t + tab_.c[l] * tau_);
  return G;
}

Eigen::VectorXd Stepper::update(const StageVector& Y, const Eigen::VectorXd& prev) const {
  if (tab_.stiffly_accurate) return Y.col(tab_.s - 1);
  const Eigen::VectorXd w = tab_.A_inv.transpose() * tab_.b;
  return tab_.r_infinity * prev + Y * w;
}

void Stepper::advance(TrajectoryState& state, const StageVector& U, const StageVector& P) const {
  state.u = update(U, state.u);
  state.p = update(P, state.p);
  state.push_stages(P);
  state.n += 1;
  state.t = state.n * tau_;
}

// ---------------------------------------------------------------------------

MonolithicStepper::MonolithicStepper(const CoupledSystem& sys, ButcherTableau tab, double tau)
    : Stepper(sys, std::move(tab), tau) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(tab_.s, tab_.s);
  const SparseMatrix Dt = sys.D.transpose();
  const SparseMatrix K = block2x2(kron(I, sys.A->matrix()), kron(-I, Dt), kron(tab_.A_inv / tau_, sys.D),
                                  flow_matrix(sys, tab_, 1.0 / tau_));
  solver_ = std::make_unique<SparseSolver>(K);
}

void MonolithicStepper::step(TrajectoryState& state) {
  const Eigen::Index nu = sys_.n_u, np = sys_.n_p, s = tab_.s;
  const StageVector F = stage_f(state.t), G = stage_g(state.t);
  const Eigen::VectorXd r_u = sys_.A->apply(state.u) - sys_.D.transpose() * state.p;
  const Eigen::VectorXd r_p = sys_.B->apply(state.p);
  Eigen::VectorXd rhs(s * (nu + np));
  for (Eigen::Index l = 0; l < s; ++l) {
    rhs.segment(l * nu, nu) = F.col(l) - r_u;
    rhs.segment(s * nu + l * np, np) = G.col(l) - r_p;
  }
  const Eigen::VectorXd x = solver_->solve(rhs);
  const StageVector U = unflatten(x.head(s * nu), nu, s).colwise() + state.u;
  const StageVector P = unflatten(x.tail(s * np), np, s).colwise() + state.p;
  advance(state, U, P);
}

// ---------------------------------------------------------------------------

SemiExplicitStepper::SemiExplicitStepper(const CoupledSystem& sys, ButcherTableau tab, DelayScheme delay,
                                         double tau, HistoryInit init)
    : Stepper(sys, std::move(tab), tau), delay_(std::move(delay)), init_(init) {
  flow_ = std::make_unique<SparseSolver>(flow_matrix(sys, tab_, 1.0 / tau_));
}

void SemiExplicitStepper::step(TrajectoryState& state) {
  const std::size_t k = static_cast<std::size_t>(delay_.k);
  state.history_capacity = std::max(state.history_capacity, k);
  if (state.pressure_history.size() < k) {
    if (init_ != HistoryInit::bootstrap_monolithic)
      throw DomainError("semi-explicit step: pressure history holds " +
                        std::to_string(state.pressure_history.size()) + " of " + std::to_string(k) +
                        " required stage vectors");
    if (!bootstrap_) bootstrap_ = std::make_unique<MonolithicStepper>(sys_, tab_, tau_);
    bootstrap_->step(state);
    return;
  }
  const Eigen::Index np = sys_.n_p, s = tab_.s;
  StageVector extrap = StageVector::Zero(np, s);
  for (std::size_t d = 1; d <= k; ++d) extrap += delay_.coeffs[d - 1] * state.pressure_history[d - 1];

  const StageVector F = stage_f(state.t), G = stage_g(state.t);
  const StageVector U = sys_.A->solve(Eigen::MatrixXd(F + sys_.D.transpose() * extrap));
  const StageVector dU = U.colwise() - state.u;
  const StageVector rhs = (G.colwise() - sys_.B->apply(state.p)) - (sys_.D * dU) * tab_.A_inv.transpose() / tau_;
  const StageVector P = unflatten(flow_->solve(flatten(rhs)), np, s).colwise() + state.p;
  advance(state, U, P);
}

// ---------------------------------------------------------------------------

FixedStressStepper::FixedStressStepper(const CoupledSystem& sys, ButcherTableau tab, double tau, double L,
                                       double tol, int max_iter, IterationStart start)
    : Stepper(sys, std::move(tab), tau), L_(L), tol_(tol), max_iter_(max_iter), start_(start) {
  flow_ = std::make_unique<SparseSolver>(flow_matrix(sys, tab_, (1.0 + L_) / tau_));
}

void FixedStressStepper::step(TrajectoryState& state) {
  const Eigen::Index np = sys_.n_p, s = tab_.s;
  const StageVector F = stage_f(state.t), G = stage_g(state.t);
  const StageVector Gb = G.colwise() - sys_.B->apply(state.p);
  const Eigen::MatrixXd AinvT = tab_.A_inv.transpose();

  StageVector U = state.u.replicate(1, s);
  if (start_ == IterationStart::consistent)
    U = sys_.A->solve(Eigen::MatrixXd(F + (sys_.D.transpose() * state.p).replicate(1, s)));
  StageVector dP = StageVector::Zero(np, s);  // P - 1 p^{n-1}
  StageVector dP_prev = dP;
  StepLog log{state.n + 1, state.t + tau_, {}};
  for (int i = 1;; ++i) {
    const StageVector Udot = (U.colwise() - state.u) * AinvT / tau_;
    const StageVector rhs = Gb - sys_.D * Udot + (L_ / tau_) * (sys_.C->apply(Eigen::MatrixXd(dP_prev)) * AinvT);
    dP = unflatten(flow_->solve(flatten(rhs)), np, s);
    const StageVector P = dP.colwise() + state.p;
    U = sys_.A->solve(Eigen::MatrixXd(F + sys_.D.transpose() * P));
    const double theta = weighted_stage_norm(sys_.C->matrix(), dP - dP_prev, tab_.b);
    log.theta_norms.push_back(theta);
    if (theta <= tol_) {
      state.iteration_log.push_back(std::move(log));
      advance(state, U, P);
      return;
    }
    if (i >= max_iter_)
      throw ConvergenceError("fixed-stress iteration exceeded " + std::to_string(max_iter_) +
                                 " iterations at step " + std::to_string(state.n + 1) + "; norms: " +
                                 norm_history(log.theta_norms),
                             log.theta_norms);
    dP_prev = dP;
  }
}

// ---------------------------------------------------------------------------

UndrainedSplitStepper::UndrainedSplitStepper(const CoupledSystem& sys, ButcherTableau tab, double tau,
                                             double L, double tol, int max_iter, IterationStart start)
    : Stepper(sys, std::move(tab), tau), L_(L), tol_(tol), max_iter_(max_iter), start_(start) {
  const SparseMatrix Dt = sys.D.transpose();
  const SparseMatrix negC = -sys.C->matrix();
  mech_ = std::make_unique<SparseSolver>(block2x2(sys.A->matrix(), L_ * Dt, sys.D, negC));
  flow_ = std::make_unique<SparseSolver>(flow_matrix(sys, tab_, 1.0 / tau_));
}

void UndrainedSplitStepper::step(TrajectoryState& state) {
  const Eigen::Index nu = sys_.n_u, np = sys_.n_p, s = tab_.s;
  const StageVector F = stage_f(state.t), G = stage_g(state.t);
  const StageVector Gb = G.colwise() - sys_.B->apply(state.p);
  const Eigen::MatrixXd AinvT = tab_.A_inv.transpose();
  const SparseMatrix Dt = sys_.D.transpose();

  StageVector U = state.u.replicate(1, s);
  StageVector P = state.p.replicate(1, s);
  if (start_ == IterationStart::consistent) P = unflatten(flow_->solve(flatten(Gb)), np, s).colwise() + state.p;
  StepLog log{state.n + 1, state.t + tau_, {}};
  for (int i = 1;; ++i) {
    StageVector U_new(nu, s);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + np);
    for (Eigen::Index l = 0; l < s; ++l) {
      Eigen::VectorXd top = F.col(l) + Dt * P.col(l);
      if (L_ != 0.0) top += L_ * (Dt * sys_.C->solve(Eigen::VectorXd(sys_.D * U.col(l))));
      rhs.head(nu) = top;
      U_new.col(l) = mech_->solve(rhs).head(nu);
    }
    const StageVector frhs = Gb - (sys_.D * (U_new.colwise() - state.u)) * AinvT / tau_;
    P = unflatten(flow_->solve(flatten(frhs)), np, s).colwise() + state.p;
    const double theta = mtilde_seminorm(sys_, U_new - U, tab_.b);
    U = U_new;
    log.theta_norms.push_back(theta);
    if (theta <= tol_) {
      state.iteration_log.push_back(std::move(log));
      advance(state, U, P);
      return;
    }
    if (i >= max_iter_)
      throw ConvergenceError("undrained-split iteration exceeded " + std::to_string(max_iter_) +
                                 " iterations at step " + std::to_string(state.n + 1) + "; norms: " +
                                 norm_history(log.theta_norms),
                             log.theta_norms);
  }
}

// ---------------------------------------------------------------------------

std::unique_ptr<Stepper> make_stepper(const CoupledSystem& sys, const SchemeConfig& cfg, double tau) {
  cfg.validate();
  const double tol = cfg.tol ? *cfg.tol : recommended_tol(cfg.tableau, nullptr, tau);
  switch (cfg.kind) {
    case SchemeKind::monolithic:
      return std::make_unique<MonolithicStepper>(sys, cfg.tableau, tau);
    case SchemeKind::semi_explicit:
      return std::make_unique<SemiExplicitStepper>(sys, cfg.tableau, *cfg.delay, tau, cfg.history_init);
    case SchemeKind::fixed_stress:
      return std::make_unique<FixedStressStepper>(sys, cfg.tableau, tau, *cfg.stabilization, tol, cfg.max_iter,
                                                  cfg.iteration_start);
    case SchemeKind::undrained_split:
      return std::make_unique<UndrainedSplitStepper>(sys, cfg.tableau, tau, *cfg.stabilization, tol,
                                                     cfg.max_iter, cfg.iteration_start);
  }
  throw ConfigError("unknown scheme kind");
}

double recommended_tol(const ButcherTableau& tab, const DelayScheme*, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("recommended_tol: tau must lie in (0, 1)");
  return std::pow(tau, tab.classical_order + 1.5);
}

void fill_exact_history(TrajectoryState& state, const ExactSolution& exact, const ButcherTableau& tab,
                        double tau, int k) {
  state.history_capacity = std::max<std::size_t>(state.history_capacity, static_cast<std::size_t>(k));
  state.pressure_history.clear();
  for (int m = 0; m > -k; --m) {
    StageVector P(state.p.size(), tab.s);
    for (int l = 0; l < tab.s; ++l) P.col(l) = exact.p((m - 1 + tab.c[l]) * tau);
    state.pressure_history.push_back(P);
  }
}

double RunResult::average_iterations() const {
  if (iteration_log.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : iteration_log) total += static_cast<double>(s.theta_norms.size());
  return total / static_cast<double>(iteration_log.size());
}

RunResult run(const CoupledSystem& sys, const SchemeConfig& cfg, double tau, double T, const ExactSolution* exact,
              const RunOptions& opts) {
  if (!(tau > 0.0) || !(T > 0.0)) throw DomainError("run: tau and T must be positive");
  const double ratio = T / tau;
  const int N = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - N) > 1e-9 || N < 1) throw DomainError("run: T/tau must be a positive integer");

  auto stepper = make_stepper(sys, cfg, tau);
  TrajectoryState state = initial_state(sys);
  if (cfg.kind == SchemeKind::semi_explicit) {
    state.history_capacity = static_cast<std::size_t>(cfg.delay->k);
    if (cfg.history_init == HistoryInit::exact_solution) {
      if (!exact) throw ConfigError("exact_solution history initialization needs an exact solution");
      fill_exact_history(state, *exact, cfg.tableau, tau, cfg.delay->k);
    }
  }

  RunResult res;
  res.steps = N;
  if (opts.keep_trajectory) {
    res.u_traj.push_back(state.u);
    res.p_traj.push_back(state.p);
  }
  for (int n = 1; n <= N; ++n) {
    stepper->step(state);
    if (opts.keep_trajectory) {
      res.u_traj.push_back(state.u);
      res.p_traj.push_back(state.p);
    }
    if (exact) {
      const Eigen::VectorXd eu = state.u - exact->u(state.t);
      const Eigen::VectorXd ep = state.p - exact->p(state.t);
      res.err_u.push_back(std::sqrt(std::max(0.0, eu.dot(sys.gram_V * eu))));
      res.err_p.push_back(std::sqrt(std::max(0.0, ep.dot(sys.gram_H * ep))));
      res.max_err_u = std::max(res.max_err_u, res.err_u.back());
      res.max_err_p = std::max(res.max_err_p, res.err_p.back());
    }
  }
  res.iteration_log = state.iteration_log;
  res.final_state = std::move(state);
  return res;
}

ExactSolution trajectory_lookup(std::vector<Eigen::VectorXd> u, std::vector<Eigen::VectorXd> p, double tau_ref) {
  auto us = std::make_shared<std::vector<Eigen::VectorXd>>(std::move(u));
  auto ps = std::make_shared<std::vector<Eigen::VectorXd>>(std::move(p));
  auto index = [tau_ref](double t, std::size_t size) {
    const double r = t / tau_ref;
    const long long i = std::llround(r);
    if (std::abs(r - static_cast<double>(i)) > 1e-6 || i < 0 || static_cast<std::size_t>(i) >= size)
      throw DomainError("reference trajectory has no value at t = " + std::to_string(t));
    return static_cast<std::size_t>(i);
  };
  ExactSolution ex;
  ex.u = [us, index](double t) { return (*us)[index(t, us->size())]; };
  ex.p = [ps, index](double t) { return (*ps)[index(t, ps->size())]; };
  return ex;
}

}  // namespace rkdecouple
