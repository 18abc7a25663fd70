#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rkdecouple/biot/assembly.hpp"
#include "rkdecouple/csv.hpp"
#include "rkdecouple/time_integrators.hpp"

namespace rkdecouple::experiments {

enum class Backend { dense_surrogate, biot_fem };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& name);
biot::BiotForcing forcing_from_string(const std::string& name);
IterationStart start_from_string(const std::string& name);

/// Parses "lambda=1,mu=0.5,kappa=0.1,M=1,alpha=0.1"; unspecified keys keep their defaults.
biot::BiotParameters parse_biot_parameters(const std::string& text);

struct ExperimentConfig {
  Backend backend = Backend::dense_surrogate;
  std::vector<SchemeKind> schemes;
  std::vector<std::string> tableaux;  // keys such as "radau-iia-2"
  std::vector<int> delays;            // semi-explicit delay orders; empty means 2s-1 per tableau
  double tau_max = 0.25;
  int tau_levels = 6;
  double final_time = 1.0;
  /// Dense coupling strengths. Empty means the command default.
  std::vector<double> omegas;
  /// Stabilization values; nullopt entries mean the optimal choice.
  std::vector<std::optional<double>> stabilizations;
  std::optional<double> tol;  // unset means tau^(k + 3/2), or 1e-11 for contract
  int max_iter = 100;
  std::optional<IterationStart> iteration_start;  // unset: consistent for contract, previous_step otherwise
  int spectrum_samples = 720;

  // dense backend
  int dense_size = 40;
  std::uint64_t seed = 42;

  // Biot backend
  int mesh = 16;
  int degree_u = 2;
  int degree_p = 1;
  biot::BiotParameters params;
  biot::BiotForcing forcing = biot::BiotForcing::continuous;
  double omega_tol = 1e-6;  // power iteration tolerance for the FEM coupling strength

  int jobs = 1;

  /// tau_max * 2^-j, j = 0 .. tau_levels-1.
  std::vector<double> taus() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Table plus human-readable summary lines. status: 0 ok, 4 assertion failure, 5 non-contractive.
struct CommandResult {
  CsvTable table;
  std::vector<std::string> summary;
  int status = 0;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_solver_failure = 3;
inline constexpr int exit_assertion_failure = 4;
inline constexpr int exit_non_contractive = 5;

/// Rows backend,scheme,tableau,k,tau,err_u_V,err_p_H followed by one summary row per
/// (scheme, tableau, k) with tau = "slope". Dense reference: radau-iia-3 monolithic at tau_min/16.
CommandResult cmd_converge(const ExperimentConfig& cfg);

/// Rows scheme,tableau,tau,avg_iterations. Optimal L: mu_max/2 (fixed-stress), 1/2 (undrained-split).
CommandResult cmd_iterate_counts(const ExperimentConfig& cfg);

/// Dense backend only. Rows scheme,L,omega,step,iter,theta_norm,ratio,bound, at tau = tau_max.
CommandResult cmd_contract(const ExperimentConfig& cfg);

/// Dense backend only. Rows tableau,k,omega,theta,sigma_min,delta_min_re_eig,re_one_plus_mu_delta.
CommandResult cmd_spectrum(const ExperimentConfig& cfg);

}  // namespace rkdecouple::experiments
