#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rkdecouple/errors.hpp"
#include "rkdecouple/experiments.hpp"

namespace ex = rkdecouple::experiments;

namespace {

struct RawOptions {
  std::string backend = "dense_surrogate";
  std::vector<std::string> schemes;
  std::vector<std::string> tableaux;
  std::vector<int> delays;
  double tau_max = 0.25;
  int tau_levels = 6;
  double final_time = 1.0;
  std::vector<double> omegas;
  std::vector<std::string> stabilizations;
  std::string tol;
  int max_iter = 100;
  std::string start;
  int size = 40;
  std::uint64_t seed = 42;
  int mesh = 16;
  std::string degrees = "2,1";
  std::string params;
  std::string forcing = "continuous";
  double omega_tol = 1e-6;
  int samples = 720;
  int jobs = 1;
  std::string out;
};

void add_common(CLI::App* sub, RawOptions& o) {
  sub->add_option("--backend", o.backend, "dense_surrogate or biot_fem")->capture_default_str();
  sub->add_option("--scheme", o.schemes, "monolithic, semi-explicit, fixed-stress, undrained-split")->delimiter(',');
  sub->add_option("--tableau", o.tableaux, "radau-iia-1 .. radau-iia-3")->delimiter(',');
  sub->add_option("--delays", o.delays, "semi-explicit delay orders (default 2s-1)")->delimiter(',');
  sub->add_option("--tau-max", o.tau_max, "largest step size")->capture_default_str();
  sub->add_option("--tau-levels", o.tau_levels, "number of halvings")->capture_default_str();
  sub->add_option("--T", o.final_time, "final time")->capture_default_str();
  sub->add_option("--omega", o.omegas, "dense coupling strengths")->delimiter(',');
  sub->add_option("--stabilization", o.stabilizations, "L values or 'optimal'")->delimiter(',');
  sub->add_option("--tol", o.tol, "inner stopping tolerance (default tau^(k+3/2))");
  sub->add_option("--max-iter", o.max_iter, "inner iteration cap")->capture_default_str();
  sub->add_option("--start", o.start, "inner iteration start: previous or consistent");
  sub->add_option("--size", o.size, "dense surrogate dimension n_u = n_p")->capture_default_str();
  sub->add_option("--seed", o.seed, "dense surrogate seed")->capture_default_str();
  sub->add_option("--mesh", o.mesh, "cells per side")->capture_default_str();
  sub->add_option("--degrees", o.degrees, "Taylor-Hood pair u,p")->capture_default_str();
  sub->add_option("--params", o.params, "lambda=1,mu=0.5,kappa=0.1,M=1,alpha=0.1");
  sub->add_option("--forcing", o.forcing, "continuous or semi-discrete")->capture_default_str();
  sub->add_option("--omega-tol", o.omega_tol, "power iteration tolerance (FEM)")->capture_default_str();
  sub->add_option("--samples", o.samples, "unit circle samples (spectrum)")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "parallel runs")->capture_default_str();
  sub->add_option("--out", o.out, "CSV path (default stdout)");
}

double parse_number(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw rkdecouple::ConfigError(field + ": '" + text + "' is not a number");
}

ex::ExperimentConfig build_config(const RawOptions& o) {
  ex::ExperimentConfig c;
  c.backend = ex::backend_from_string(o.backend);
  for (const auto& s : o.schemes) c.schemes.push_back(rkdecouple::scheme_from_string(s));
  c.tableaux = o.tableaux;
  c.delays = o.delays;
  c.tau_max = o.tau_max;
  c.tau_levels = o.tau_levels;
  c.final_time = o.final_time;
  c.omegas = o.omegas;
  for (const auto& s : o.stabilizations) {
    if (s == "optimal") c.stabilizations.emplace_back(std::nullopt);
    else c.stabilizations.emplace_back(parse_number("stabilization", s));
  }
  if (!o.tol.empty() && o.tol != "recommended") c.tol = parse_number("tol", o.tol);
  c.max_iter = o.max_iter;
  if (!o.start.empty()) c.iteration_start = ex::start_from_string(o.start);
  c.dense_size = o.size;
  c.seed = o.seed;
  c.mesh = o.mesh;
  const auto comma = o.degrees.find(',');
  if (comma == std::string::npos) throw rkdecouple::ConfigError("degrees: expected 'u,p'");
  c.degree_u = static_cast<int>(parse_number("degrees", o.degrees.substr(0, comma)));
  c.degree_p = static_cast<int>(parse_number("degrees", o.degrees.substr(comma + 1)));
  if (!o.params.empty()) c.params = ex::parse_biot_parameters(o.params);
  c.forcing = ex::forcing_from_string(o.forcing);
  c.omega_tol = o.omega_tol;
  c.spectrum_samples = o.samples;
  c.jobs = o.jobs;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runge-Kutta decoupling experiments for elliptic-parabolic systems"};
  app.set_config("--config", "", "key = value file; one [section] per subcommand");
  app.require_subcommand(1);

  RawOptions opts;
  struct Sub {
    const char* name;
    const char* help;
    ex::CommandResult (*fn)(const ex::ExperimentConfig&);
  };
  const std::vector<Sub> subs = {
      {"converge", "temporal convergence sweep", ex::cmd_converge},
      {"contract", "inner iteration contraction study (dense)", ex::cmd_contract},
      {"spectrum", "unit circle sweep of L(zeta) (dense)", ex::cmd_spectrum},
      {"iterate-counts", "average inner iterations per step", ex::cmd_iterate_counts},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opts);
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return ex::exit_config_error;
  }

  try {
    const ex::ExperimentConfig cfg = build_config(opts);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!apps[i]->parsed()) continue;
      const ex::CommandResult res = subs[i].fn(cfg);
      if (opts.out.empty()) {
        res.table.write(std::cout);
      } else {
        std::ofstream f(opts.out, std::ios::binary);
        if (!f) throw rkdecouple::ConfigError("out: cannot open '" + opts.out + "'");
        res.table.write(f);
      }
      std::ostream& info = opts.out.empty() ? std::cerr : std::cout;
      for (const auto& line : res.summary) info << line << '\n';
      return res.status;
    }
  } catch (const rkdecouple::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return ex::exit_solver_failure;
  }
  return ex::exit_ok;
}
