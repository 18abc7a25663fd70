#include "rkdecouple/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "rkdecouple/biot/mesh.hpp"
#include "rkdecouple/errors.hpp"
#include "rkdecouple/spectral_diagnostics.hpp"

namespace rkdecouple::experiments {

namespace {

// Results come back in index order whatever the thread interleaving; the first failure by index
// is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t n, int jobs, const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
  std::vector<R> res;
  res.reserve(n);
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

std::vector<std::string> default_tableaux() { return {"radau-iia-1", "radau-iia-2", "radau-iia-3"}; }

std::vector<int> delays_for(const ExperimentConfig& cfg, const ButcherTableau& tab) {
  if (!cfg.delays.empty()) return cfg.delays;
  return {2 * tab.s - 1};
}

std::string fmt(double v) { return format_double(v); }

struct SystemBundle {
  ManufacturedSystem ms;
  std::string label;
};

SystemBundle dense_system(const ExperimentConfig& cfg, double omega) {
  return {make_dense_surrogate(cfg.dense_size, cfg.dense_size, omega, cfg.seed), "dense_surrogate"};
}

SystemBundle biot_system(const ExperimentConfig& cfg) {
  const auto disc = std::make_shared<biot::BiotDiscretization>(
      biot::assemble_biot(biot::build_mesh(cfg.mesh), cfg.params, cfg.degree_u, cfg.degree_p));
  const biot::ManufacturedProblem problem(cfg.params);
  return {biot::make_biot_system(*disc, problem, cfg.forcing), "biot_fem"};
}

double top_pencil_eigenvalue(const ExperimentConfig& cfg, const CoupledSystem& sys) {
  if (cfg.backend == Backend::dense_surrogate) return pencil_eigenvalues(sys).maxCoeff();
  return coupling_strength(sys, cfg.omega_tol);
}

double optimal_stabilization(SchemeKind kind, double mu_max) {
  return kind == SchemeKind::fixed_stress ? 0.5 * mu_max : 0.5;
}

double max_weighted_error(const std::vector<Eigen::VectorXd>& traj, const ExactSolution& ref, double tau,
                          const SparseMatrix& gram, bool pressure) {
  double worst = 0.0;
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const double t = static_cast<double>(n) * tau;
    const Eigen::VectorXd e = traj[n] - (pressure ? ref.p(t) : ref.u(t));
    worst = std::max(worst, std::sqrt(std::max(0.0, e.dot(gram * e))));
  }
  return worst;
}

}  // namespace

std::string to_string(Backend b) { return b == Backend::dense_surrogate ? "dense_surrogate" : "biot_fem"; }

Backend backend_from_string(const std::string& name) {
  if (name == "dense" || name == "dense_surrogate" || name == "dense-surrogate") return Backend::dense_surrogate;
  if (name == "biot" || name == "biot_fem" || name == "biot-fem" || name == "fem") return Backend::biot_fem;
  throw ConfigError("backend: unknown value '" + name + "' (expected dense_surrogate or biot_fem)");
}

biot::BiotForcing forcing_from_string(const std::string& name) {
  if (name == "continuous") return biot::BiotForcing::continuous;
  if (name == "semi-discrete" || name == "semi_discrete") return biot::BiotForcing::semi_discrete;
  throw ConfigError("forcing: unknown value '" + name + "' (expected continuous or semi-discrete)");
}

IterationStart start_from_string(const std::string& name) {
  if (name == "previous" || name == "previous_step" || name == "previous-step") return IterationStart::previous_step;
  if (name == "consistent") return IterationStart::consistent;
  throw ConfigError("start: unknown value '" + name + "' (expected previous or consistent)");
}

biot::BiotParameters parse_biot_parameters(const std::string& text) {
  biot::BiotParameters p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("params: entry '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("params: value of '" + key + "' is not a number");
    }
    if (key == "lambda") p.lambda = value;
    else if (key == "mu") p.mu = value;
    else if (key == "kappa" || key == "kappa_over_nu") p.kappa_over_nu = value;
    else if (key == "M" || key == "M_biot" || key == "biot_modulus") p.biot_modulus = value;
    else if (key == "alpha") p.alpha = value;
    else throw ConfigError("params: unknown key '" + key + "'");
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return p;
}

std::vector<double> ExperimentConfig::taus() const {
  std::vector<double> out;
  for (int j = 0; j < tau_levels; ++j) out.push_back(std::ldexp(tau_max, -j));
  return out;
}

void ExperimentConfig::validate() const {
  if (!(tau_max > 0.0 && tau_max < 1.0)) throw ConfigError("tau-max: must lie in (0, 1)");
  if (tau_levels < 1 || tau_levels > 20) throw ConfigError("tau-levels: must lie in [1, 20]");
  if (!(final_time > 0.0)) throw ConfigError("T: must be positive");
  for (double tau : taus()) {
    const double r = final_time / tau;
    if (std::abs(r - std::round(r)) > 1e-9) throw ConfigError("T: T/tau is not an integer for tau = " + fmt(tau));
  }
  for (const auto& key : tableaux) {
    try {
      (void)tableau_from_key(key);
    } catch (const std::exception& e) {
      throw ConfigError("tableau: " + std::string(e.what()));
    }
  }
  for (int k : delays)
    if (k < 1 || k > 10) throw ConfigError("delays: order " + std::to_string(k) + " outside [1, 10]");
  for (double w : omegas)
    if (!(w >= 0.0)) throw ConfigError("omega: must be >= 0");
  for (const auto& L : stabilizations)
    if (L && !(*L >= 0.0)) throw ConfigError("stabilization: must be >= 0");
  if (tol && !(*tol > 0.0)) throw ConfigError("tol: must be positive");
  if (max_iter < 1) throw ConfigError("max-iter: must be >= 1");
  if (dense_size < 2 || dense_size > 200) throw ConfigError("size: dense dimension must lie in [2, 200]");
  if (mesh < 2) throw ConfigError("mesh: need at least 2 cells per side");
  if (!((degree_u == 2 && degree_p == 1) || (degree_u == 3 && degree_p == 2)))
    throw ConfigError("degrees: supported pairs are 2,1 and 3,2");
  if (jobs < 1) throw ConfigError("jobs: must be >= 1");
  if (spectrum_samples < 8) throw ConfigError("samples: need at least 8");
  if (!(omega_tol > 0.0)) throw ConfigError("omega-tol: must be positive");
}

// ---------------------------------------------------------------------------

CommandResult cmd_converge(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto schemes =
      cfg.schemes.empty() ? std::vector<SchemeKind>{SchemeKind::monolithic, SchemeKind::semi_explicit} : cfg.schemes;
  const auto keys = cfg.tableaux.empty() ? default_tableaux() : cfg.tableaux;
  const auto taus = cfg.taus();

  struct Series {
    SchemeKind kind;
    ButcherTableau tab;
    std::optional<int> k;
    double omega;
  };
  std::vector<Series> series;
  for (SchemeKind kind : schemes)
    for (const auto& key : keys) {
      const ButcherTableau tab = tableau_from_key(key);
      const auto ks = delays_for(cfg, tab);
      if (kind == SchemeKind::semi_explicit) {
        for (int k : ks)
          series.push_back({kind, tab, k, cfg.omegas.empty() ? 0.5 * weak_coupling_bound(k) : cfg.omegas.front()});
      } else {
        series.push_back({kind, tab, std::nullopt,
                          cfg.omegas.empty() ? 0.5 * weak_coupling_bound(ks.front()) : cfg.omegas.front()});
      }
    }

  // one system (and reference trajectory) per coupling strength
  struct Prepared {
    SystemBundle bundle;
    std::vector<Eigen::VectorXd> ref_u, ref_p;
    double tau_ref = 0.0;
  };
  std::map<double, std::shared_ptr<Prepared>> systems;
  if (cfg.backend == Backend::biot_fem) {
    auto prep = std::make_shared<Prepared>(Prepared{biot_system(cfg), {}, {}, 0.0});
    for (const auto& s : series) systems[s.omega] = prep;
  } else {
    std::vector<double> omegas;
    for (const auto& s : series)
      if (std::find(omegas.begin(), omegas.end(), s.omega) == omegas.end()) omegas.push_back(s.omega);
    const double tau_ref = taus.back() / 16.0;
    auto prepared = parallel_map<std::shared_ptr<Prepared>>(omegas.size(), cfg.jobs, [&](std::size_t i) {
      auto prep = std::make_shared<Prepared>(Prepared{dense_system(cfg, omegas[i]), {}, {}, tau_ref});
      SchemeConfig ref;
      ref.tableau = radau_iia(3);
      RunOptions opts;
      opts.keep_trajectory = true;
      auto rr = run(prep->bundle.ms.system, ref, tau_ref, cfg.final_time, nullptr, opts);
      prep->ref_u = std::move(rr.u_traj);
      prep->ref_p = std::move(rr.p_traj);
      return prep;
    });
    for (std::size_t i = 0; i < omegas.size(); ++i) systems[omegas[i]] = prepared[i];
  }

  std::map<const Prepared*, double> mu_max;
  for (const auto& s : series)
    if ((s.kind == SchemeKind::fixed_stress) && !mu_max.count(systems[s.omega].get()))
      mu_max[systems[s.omega].get()] = top_pencil_eigenvalue(cfg, systems[s.omega]->bundle.ms.system);

  struct Cell {
    double err_u, err_p;
  };
  const std::size_t n_tasks = series.size() * taus.size();
  auto cells = parallel_map<Cell>(n_tasks, cfg.jobs, [&](std::size_t idx) {
    const Series& s = series[idx / taus.size()];
    const double tau = taus[idx % taus.size()];
    const Prepared& prep = *systems.at(s.omega);
    const ManufacturedSystem& ms = prep.bundle.ms;
    SchemeConfig sc;
    sc.kind = s.kind;
    sc.tableau = s.tab;
    sc.max_iter = cfg.max_iter;
    if (s.k) {
      sc.delay = make_delay_scheme(*s.k);
      sc.history_init = HistoryInit::exact_solution;
    }
    if (sc.iterative()) {
      const double mu = s.kind == SchemeKind::fixed_stress ? mu_max.at(&prep) : 0.0;
      const auto L = cfg.stabilizations.empty() ? std::nullopt : cfg.stabilizations.front();
      sc.stabilization = L ? *L : optimal_stabilization(s.kind, mu);
      sc.tol = cfg.tol;
      sc.iteration_start = cfg.iteration_start.value_or(IterationStart::previous_step);
    }
    if (cfg.backend == Backend::biot_fem) {
      const auto r = run(ms.system, sc, tau, cfg.final_time, &ms.exact);
      return Cell{r.max_err_u, r.max_err_p};
    }
    RunOptions opts;
    opts.keep_trajectory = true;
    const auto r = run(ms.system, sc, tau, cfg.final_time, &ms.exact, opts);
    const ExactSolution ref = trajectory_lookup(prep.ref_u, prep.ref_p, prep.tau_ref);
    return Cell{max_weighted_error(r.u_traj, ref, tau, ms.system.gram_V, false),
                max_weighted_error(r.p_traj, ref, tau, ms.system.gram_H, true)};
  });

  CommandResult out;
  out.table.header = {"backend", "scheme", "tableau", "k", "tau", "err_u_V", "err_p_H"};
  const std::string backend = to_string(cfg.backend);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const std::string k = s.k ? std::to_string(*s.k) : "";
    std::vector<std::pair<double, double>> rows_u, rows_p;
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      const Cell& c = cells[si * taus.size() + ti];
      out.table.add_row({backend, to_string(s.kind), s.tab.name, k, fmt(taus[ti]), fmt(c.err_u), fmt(c.err_p)});
      rows_u.emplace_back(taus[ti], c.err_u);
      rows_p.emplace_back(taus[ti], c.err_p);
    }
    if (taus.size() >= 3) {
      const RateFit fu = estimate_rate(rows_u), fp = estimate_rate(rows_p);
      out.table.add_row({backend, to_string(s.kind), s.tab.name, k, "slope", fmt(fu.slope), fmt(fp.slope)});
      out.summary.push_back(to_string(s.kind) + " " + s.tab.name + (s.k ? " k=" + k : "") +
                            ": slope_u=" + fmt(fu.slope) + " slope_p=" + fmt(fp.slope));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

CommandResult cmd_iterate_counts(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto schemes = cfg.schemes.empty()
                           ? std::vector<SchemeKind>{SchemeKind::fixed_stress, SchemeKind::undrained_split}
                           : cfg.schemes;
  for (SchemeKind k : schemes)
    if (k != SchemeKind::fixed_stress && k != SchemeKind::undrained_split)
      throw ConfigError("scheme: iterate-counts needs fixed-stress or undrained-split, got " + to_string(k));
  const auto keys = cfg.tableaux.empty() ? default_tableaux() : cfg.tableaux;
  const auto taus = cfg.taus();

  const SystemBundle bundle = cfg.backend == Backend::biot_fem
                                  ? biot_system(cfg)
                                  : dense_system(cfg, cfg.omegas.empty() ? 0.01 : cfg.omegas.front());
  const CoupledSystem& sys = bundle.ms.system;
  const double mu_max = top_pencil_eigenvalue(cfg, sys);

  struct Task {
    SchemeKind kind;
    ButcherTableau tab;
    double tau;
  };
  std::vector<Task> tasks;
  for (SchemeKind kind : schemes)
    for (const auto& key : keys)
      for (double tau : taus) tasks.push_back({kind, tableau_from_key(key), tau});

  auto avg = parallel_map<double>(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    SchemeConfig sc;
    sc.kind = t.kind;
    sc.tableau = t.tab;
    const auto L = cfg.stabilizations.empty() ? std::nullopt : cfg.stabilizations.front();
    sc.stabilization = L ? *L : optimal_stabilization(t.kind, mu_max);
    sc.tol = cfg.tol;
    sc.max_iter = cfg.max_iter;
    sc.iteration_start = cfg.iteration_start.value_or(IterationStart::previous_step);
    return run(sys, sc, t.tau, cfg.final_time).average_iterations();
  });

  CommandResult out;
  out.table.header = {"scheme", "tableau", "tau", "avg_iterations"};
  for (std::size_t i = 0; i < tasks.size(); ++i)
    out.table.add_row({to_string(tasks[i].kind), tasks[i].tab.name, fmt(tasks[i].tau), fmt(avg[i])});
  out.summary.push_back(bundle.label + ": mu_max=" + fmt(mu_max));
  return out;
}

// ---------------------------------------------------------------------------

CommandResult cmd_contract(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.backend != Backend::dense_surrogate) throw ConfigError("backend: contract needs the dense backend");
  const auto schemes = cfg.schemes.empty()
                           ? std::vector<SchemeKind>{SchemeKind::fixed_stress, SchemeKind::undrained_split}
                           : cfg.schemes;
  for (SchemeKind k : schemes)
    if (k != SchemeKind::fixed_stress && k != SchemeKind::undrained_split)
      throw ConfigError("scheme: contract needs fixed-stress or undrained-split, got " + to_string(k));
  const auto omegas = cfg.omegas.empty() ? std::vector<double>{0.01, 0.2, 0.8} : cfg.omegas;
  const auto stabs = cfg.stabilizations.empty()
                         ? std::vector<std::optional<double>>{0.0, std::nullopt, 1.0}
                         : cfg.stabilizations;
  const ButcherTableau tab = tableau_from_key(cfg.tableaux.empty() ? "radau-iia-2" : cfg.tableaux.front());
  const double tau = cfg.tau_max;
  const double tol = cfg.tol.value_or(1e-11);
  const IterationStart start = cfg.iteration_start.value_or(IterationStart::consistent);

  auto systems = parallel_map<SystemBundle>(omegas.size(), cfg.jobs,
                                            [&](std::size_t i) { return dense_system(cfg, omegas[i]); });
  std::vector<double> mus;
  for (const auto& b : systems) mus.push_back(pencil_eigenvalues(b.ms.system).maxCoeff());

  struct Task {
    std::size_t sys;
    SchemeKind kind;
    double L;
  };
  std::vector<Task> tasks;
  for (std::size_t w = 0; w < omegas.size(); ++w)
    for (SchemeKind kind : schemes)
      for (const auto& L : stabs) tasks.push_back({w, kind, L ? *L : optimal_stabilization(kind, mus[w])});

  struct Outcome {
    std::vector<StepLog> logs;
    bool diverged = false;
    std::string message;
  };
  auto outcomes = parallel_map<Outcome>(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const CoupledSystem& sys = systems[t.sys].ms.system;
    SchemeConfig sc;
    sc.kind = t.kind;
    sc.tableau = tab;
    sc.stabilization = t.L;
    sc.tol = tol;
    sc.max_iter = cfg.max_iter;
    sc.iteration_start = start;
    auto stepper = make_stepper(sys, sc, tau);
    TrajectoryState state = initial_state(sys);
    const int N = static_cast<int>(std::llround(cfg.final_time / tau));
    Outcome o;
    try {
      for (int n = 0; n < N; ++n) stepper->step(state);
    } catch (const ConvergenceError& e) {
      o.diverged = true;
      o.message = e.what();
      state.iteration_log.push_back(StepLog{state.n + 1, state.t + tau, e.history()});
    }
    o.logs = std::move(state.iteration_log);
    return o;
  });

  CommandResult out;
  out.table.header = {"scheme", "L", "omega", "step", "iter", "theta_norm", "ratio", "bound"};
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    const double mu = mus[t.sys];
    const double bound = t.kind == SchemeKind::fixed_stress ? contraction_rate_fs(mu, t.L) : contraction_rate_us(mu, t.L);
    const bool contractive = bound < 1.0;
    double worst = 0.0;
    for (const auto& log : outcomes[i].logs) {
      const auto& th = log.theta_norms;
      const double scale = th.empty() ? 1.0 : std::max(1.0, th.front());
      for (std::size_t j = 0; j < th.size(); ++j) {
        std::string ratio;
        if (j > 0 && th[j - 1] > 0.0) {
          const double r = th[j] / th[j - 1];
          ratio = fmt(r);
          // pairs at roundoff level carry no information
          if (contractive && th[j - 1] > 1e4 * eps * scale) {
            worst = std::max(worst, r);
            if (r > bound + 1e-8 && out.status == 0) {
              out.status = exit_assertion_failure;
              out.summary.push_back("ASSERTION FAILED: " + to_string(t.kind) + " L=" + fmt(t.L) + " omega=" +
                                    fmt(mu) + " step=" + std::to_string(log.step) + " iter=" +
                                    std::to_string(j + 1) + " ratio=" + fmt(r) + " bound=" + fmt(bound));
            }
          }
        }
        out.table.add_row({to_string(t.kind), fmt(t.L), fmt(mu), std::to_string(log.step), std::to_string(j + 1),
                           fmt(th[j]), ratio, fmt(bound)});
      }
    }
    std::string line = to_string(t.kind) + " omega=" + fmt(mu) + " L=" + fmt(t.L) + " bound=" + fmt(bound);
    if (!contractive) {
      line += " non-contractive" + std::string(outcomes[i].diverged ? " (iteration did not converge)" : "");
      if (out.status == 0) out.status = exit_non_contractive;
    } else {
      line += " worst_ratio=" + fmt(worst);
      if (outcomes[i].diverged) {
        out.status = exit_assertion_failure;
        line += " FAILED: " + outcomes[i].message;
      }
    }
    out.summary.push_back(line);
  }
  return out;
}

// ---------------------------------------------------------------------------

CommandResult cmd_spectrum(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.backend != Backend::dense_surrogate) throw ConfigError("backend: spectrum needs the dense backend");
  const auto keys = cfg.tableaux.empty() ? default_tableaux() : cfg.tableaux;

  struct Task {
    ButcherTableau tab;
    int k;
    double omega;
  };
  std::vector<Task> tasks;
  for (const auto& key : keys) {
    const ButcherTableau tab = tableau_from_key(key);
    for (int k : delays_for(cfg, tab)) {
      if (cfg.omegas.empty()) tasks.push_back({tab, k, 0.9 * weak_coupling_bound(k)});
      for (double w : cfg.omegas) tasks.push_back({tab, k, w});
    }
  }
  SweepOptions opts;
  opts.n_samples = cfg.spectrum_samples;
  auto probes = parallel_map<SpectralProbe>(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const auto bundle = dense_system(cfg, tasks[i].omega);
    return l_zeta_sweep(bundle.ms.system, tasks[i].tab, make_delay_scheme(tasks[i].k), cfg.tau_max, opts);
  });

  CommandResult out;
  out.table.header = {"tableau", "k", "omega", "theta", "sigma_min", "delta_min_re_eig", "re_one_plus_mu_delta"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& pr = probes[i];
    for (std::size_t j = 0; j < pr.theta.size(); ++j)
      out.table.add_row({tasks[i].tab.name, std::to_string(tasks[i].k), fmt(pr.mu), fmt(pr.theta[j]),
                         fmt(pr.sigma_min[j]), fmt(pr.delta_min_re_eig[j]), fmt(pr.re_one_plus_mu_delta[j])});
    const double min_delta = *std::min_element(pr.delta_min_re_eig.begin(), pr.delta_min_re_eig.end());
    const double min_re = *std::min_element(pr.re_one_plus_mu_delta.begin(), pr.re_one_plus_mu_delta.end());
    out.summary.push_back(tasks[i].tab.name + " k=" + std::to_string(tasks[i].k) + " omega=" + fmt(pr.mu) +
                          ": min_sigma_min=" + fmt(pr.min_sigma) + " at theta=" + fmt(pr.argmin_theta) +
                          " min_delta_re_eig=" + fmt(min_delta) + " min_re_one_plus_mu_delta=" + fmt(min_re));
  }
  return out;
}

}  // namespace rkdecouple::experiments
