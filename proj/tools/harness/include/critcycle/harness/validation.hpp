#pragma once

#include <string>
#include <vector>

#include "critcycle/harness/config.hpp"

namespace critcycle::harness {

enum class ValidationLevel { Fast, Full };

struct CheckResult {
  std::string name;
  bool passed{false};
  std::string detail;
  double seconds{0.0};
};

/// Largest purity change along a noiseless run of the configured schedule, including
/// the integrator's own determinant drift (Trajectory::max_det_drift).
double noiseless_purity_drift(const ExperimentConfig& config);

/**
 * RK4 order check: the final covariance at n, 2n and 4n steps per half cycle,
 * with n the coarsest step the propagator accepts. Returns
 * |R_n - R_2n| / |R_2n - R_4n|, which tends to 16 for a fourth-order scheme.
 */
double step_halving_ratio(const ExperimentConfig& config);

struct FiniteTimeFit {
  std::vector<double> omega_tau;
  std::vector<double> deficit;  // log(3)/2 - |s| after one cycle
  double slope{0.0};            // d log(deficit) / d log(omega tau)
  double prefactor_ratio{0.0};  // fitted prefactor at slope -2/3 over 27^(-2/3)
};

/// Single-cycle squeezing deficit on a grid of omega tau values (noiseless, vacuum).
FiniteTimeFit finite_time_correction(const std::vector<double>& omega_tau_grid);

struct OracleComparison {
  int cycles{0};
  int dim{0};  // truncation the comparison was made at
  double covariance_max_difference{0.0};
  double gaussian_qfi{0.0};
  double bures_qfi{0.0};
  double qfi_relative_difference{0.0};
  double fourth_cumulant{0.0};
  double x_variance{0.0};
  double dim_doubling_change{0.0};  // largest relative change of N, Bures QFI and R under D -> 2D
};

/**
 * Fock-oracle cross-check of the Gaussian pipeline for the configured omega tau
 * (noiseless, vacuum). With check_dim_doubling, D is doubled (up to 1024) until
 * doubling it again moves no reported scalar by 1e-6 relative; the comparison is
 * made at that D.
 */
OracleComparison oracle_comparison(const ExperimentConfig& config, int cycles, int dim,
                                   bool check_dim_doubling = true);

/// Runs the check suite. Full adds the oracle and finite-time campaigns.
std::vector<CheckResult> run_validation(const ExperimentConfig& config, ValidationLevel level,
                                        int workers);

std::string validation_report_json(const std::vector<CheckResult>& checks, ValidationLevel level);

}  // namespace critcycle::harness
