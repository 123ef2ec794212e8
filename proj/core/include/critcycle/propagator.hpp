#pragma once

#include <string>
#include <vector>

#include "critcycle/gaussian_state.hpp"
#include "critcycle/matrix2.hpp"
#include "critcycle/protocol.hpp"

namespace critcycle {

/// Thermal bath coupling: rate kappa (units of omega) and bath occupation n_th.
struct NoiseParams {
  double kappa{0.0};
  double n_th{0.0};
};

void validate(const NoiseParams& noise);

/// Drift W~ and diffusion F of dR/dt = W~ R + R W~^T + F at coupling g.
struct DriftMatrices {
  Matrix2 drift;
  Matrix2 diffusion;
};

DriftMatrices drift_matrices(double g, double omega, const NoiseParams& noise);

struct EvolveOptions {
  /// Integration steps per half cycle; 0 picks default_steps_per_half_cycle().
  int steps_per_half_cycle{0};
  /// Multiplies g(t). Frequency perturbations at fixed physical coupling set this to
  /// sqrt(omega_0 / omega).
  double coupling_scale{1.0};
};

/// max(5000, ceil(100 omega tau)): tau / 5000 capped so that h <= 0.01 / omega.
int default_steps_per_half_cycle(double tau, double omega);

/// Largest step evolve() accepts: min(tau / 1000, 0.01 / omega).
double max_step(double tau, double omega);

/**
 * Uniform-grid covariance trajectory over [0, 2 m tau].
 *
 * Cycle boundaries and ramp turning points fall on grid points, so
 * states[k * 2 * steps_per_half_cycle] is the state after k cycles.
 */
struct Trajectory {
  double step{0.0};
  int steps_per_half_cycle{0};
  int cycles{0};
  std::vector<double> times;
  std::vector<CovarianceState> states;
  std::vector<std::string> warnings;
  /// Largest relative departure of the integrated det(S)^2 det(R0) from its exact
  /// value exp(-2 kappa t) det(R0); a direct measure of integrator error.
  double max_det_drift{0.0};

  std::size_t cycle_index(int m) const {
    return static_cast<std::size_t>(m) * 2U * static_cast<std::size_t>(steps_per_half_cycle);
  }
  const CovarianceState& state_after_cycle(int m) const { return states.at(cycle_index(m)); }
  std::vector<double> boson_numbers() const;
  std::vector<double> purities() const;
};

/**
 * Integrates the Lyapunov equation under the schedule with classical RK4.
 *
 * Throws ParameterError for an oversized step or a bad schedule/noise, and
 * NumericalError (naming the time) if the covariance stops being finite.
 */
Trajectory evolve(const CovarianceState& initial, const ProtocolSchedule& schedule, double omega,
                  const NoiseParams& noise, const EvolveOptions& options = {});

struct CycleRecord {
  int cycle{0};
  double time{0.0};
  double boson_number{0.0};
  double purity{1.0};
  SqueezingDecomposition squeezing;
  Matrix2 covariance;
};

/// One record per completed cycle m = 1..cycles, read at t = 2 m tau.
std::vector<CycleRecord> cycle_samples(const Trajectory& trajectory);

}  // namespace critcycle
