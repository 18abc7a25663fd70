#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rkdecouple/coupled_system.hpp"
#include "rkdecouple/delay.hpp"
#include "rkdecouple/rk_tableau.hpp"

namespace rkdecouple {

enum class SchemeKind { monolithic, semi_explicit, fixed_stress, undrained_split };
enum class HistoryInit { exact_solution, bootstrap_monolithic };
/// Inner-iteration start. previous_step: all stages equal the previous grid values.
/// consistent: as previous_step, then iterate 0 is made to satisfy the sub-problem solved second
/// (FS: mechanics with P = 1 p^{n-1}; US: flow with U = 1 u^{n-1}).
enum class IterationStart { previous_step, consistent };

std::string to_string(SchemeKind kind);
/// Accepts "monolithic", "semi-explicit", "fixed-stress", "undrained-split" (underscores also accepted).
SchemeKind scheme_from_string(const std::string& name);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::monolithic;
  ButcherTableau tableau = radau_iia(1);
  std::optional<DelayScheme> delay;       // semi_explicit only
  std::optional<double> stabilization;    // L, iterative schemes only
  std::optional<double> tol;              // iterative schemes only; unset means recommended_tol
  int max_iter = 100;
  HistoryInit history_init = HistoryInit::bootstrap_monolithic;
  IterationStart iteration_start = IterationStart::previous_step;

  /// Throws ConfigError when a scheme-specific field is missing or present for the wrong scheme.
  void validate() const;
  bool iterative() const { return kind == SchemeKind::fixed_stress || kind == SchemeKind::undrained_split; }
};

struct StepLog {
  int step = 0;
  double time = 0.0;
  std::vector<double> theta_norms;  // theta_norms[i-1] is the difference norm of iteration i
};

struct TrajectoryState {
  int n = 0;
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  /// Pressure stage values of previous steps, most recent first. Bounded by history_capacity.
  std::deque<StageVector> pressure_history;
  std::size_t history_capacity = 0;
  std::vector<StepLog> iteration_log;

  void push_stages(const StageVector& P);
};

TrajectoryState initial_state(const CoupledSystem& sys);

/// One time step of a fixed scheme; factorizations are built in the constructor and reused.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void step(TrajectoryState& state) = 0;
  double tau() const { return tau_; }

 protected:
  Stepper(const CoupledSystem& sys, ButcherTableau tab, double tau);
  /// Columns f(t + c_l tau), g(t + c_l tau).
  StageVector stage_f(double t) const;
  StageVector stage_g(double t) const;
  /// Grid value from stage values (last stage for stiffly accurate methods).
  Eigen::VectorXd update(const StageVector& Y, const Eigen::VectorXd& prev) const;
  void advance(TrajectoryState& state, const StageVector& U, const StageVector& P) const;

  const CoupledSystem& sys_;
  ButcherTableau tab_;
  double tau_;
};

class MonolithicStepper : public Stepper {
 public:
  MonolithicStepper(const CoupledSystem& sys, ButcherTableau tab, double tau);
  void step(TrajectoryState& state) override;

 private:
  std::unique_ptr<SparseSolver> solver_;
};

class SemiExplicitStepper : public Stepper {
 public:
  /// With HistoryInit::bootstrap_monolithic, steps taken while the history holds fewer than k
  /// entries are monolithic. Otherwise a short history throws DomainError.
  SemiExplicitStepper(const CoupledSystem& sys, ButcherTableau tab, DelayScheme delay, double tau,
                      HistoryInit init);
  void step(TrajectoryState& state) override;

 private:
  DelayScheme delay_;
  HistoryInit init_;
  std::unique_ptr<SparseSolver> flow_;
  std::unique_ptr<MonolithicStepper> bootstrap_;
};

class FixedStressStepper : public Stepper {
 public:
  FixedStressStepper(const CoupledSystem& sys, ButcherTableau tab, double tau, double L, double tol,
                     int max_iter, IterationStart start = IterationStart::previous_step);
  void step(TrajectoryState& state) override;

 private:
  double L_, tol_;
  int max_iter_;
  IterationStart start_;
  std::unique_ptr<SparseSolver> flow_;
};

class UndrainedSplitStepper : public Stepper {
 public:
  UndrainedSplitStepper(const CoupledSystem& sys, ButcherTableau tab, double tau, double L, double tol,
                     int max_iter, IterationStart start = IterationStart::previous_step);
  void step(TrajectoryState& state) override;

 private:
  double L_, tol_;
  int max_iter_;
  IterationStart start_;
  std::unique_ptr<SparseSolver> mech_;
  std::unique_ptr<SparseSolver> flow_;
};

std::unique_ptr<Stepper> make_stepper(const CoupledSystem& sys, const SchemeConfig& cfg, double tau);

/// tau^(k + 3/2) with k the classical order of the tableau.
double recommended_tol(const ButcherTableau& tab, const DelayScheme* delay, double tau);

/// Exact pressure stage values P^{m}, m = 0, -1, ..., 1-k, at times (m - 1 + c_l) tau.
void fill_exact_history(TrajectoryState& state, const ExactSolution& exact, const ButcherTableau& tab,
                        double tau, int k);

struct RunOptions {
  bool keep_trajectory = false;
};

struct RunResult {
  int steps = 0;
  std::vector<double> err_u;  // per step n = 1..N
  std::vector<double> err_p;
  double max_err_u = 0.0;
  double max_err_p = 0.0;
  std::vector<StepLog> iteration_log;
  std::vector<Eigen::VectorXd> u_traj;  // n = 0..N when keep_trajectory
  std::vector<Eigen::VectorXd> p_traj;
  TrajectoryState final_state;

  /// Mean number of inner iterations per step (iterative schemes).
  double average_iterations() const;
};

/// Steps from 0 to T. Requires T/tau integral within 1e-9.
RunResult run(const CoupledSystem& sys, const SchemeConfig& cfg, double tau, double T,
              const ExactSolution* exact = nullptr, const RunOptions& opts = {});

/// Exact-solution evaluator backed by a stored trajectory with uniform step tau_ref.
ExactSolution trajectory_lookup(std::vector<Eigen::VectorXd> u, std::vector<Eigen::VectorXd> p,
                                double tau_ref);

}  // namespace rkdecouple
