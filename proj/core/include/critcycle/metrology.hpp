#pragma once

#include <span>
#include <vector>

#include "critcycle/gaussian_state.hpp"
#include "critcycle/propagator.hpp"
#include "critcycle/protocol.hpp"

namespace critcycle {

/// Which coupling is held fixed when the frequency is perturbed.
enum class CouplingConvention {
  FixedPhysical,  // lambda fixed, so g scales as sqrt(omega_0 / omega)
  FixedRescaled,  // g fixed
};

struct QfiOptions {
  double eps_rel{1e-8};
  CouplingConvention convention{CouplingConvention::FixedPhysical};
  int steps_per_half_cycle{0};
  /// Rerun at eps / 10 and flag results that move by more than 1%.
  bool check_eps{false};
  /// Also evaluate the QFI at every integration grid point.
  bool dense{false};
};

/**
 * QFI of a centered Gaussian state from a central-difference triple.
 *
 * I = Tr[(R^-1 dR)^2] / (2 (1 + P^2)) + 2 (dP)^2 / (1 - P^4); the purity term is
 * dropped when P > 1 - 1e-9, where it is 0/0 and vanishes analytically.
 */
double gaussian_qfi(const CovarianceState& center, const CovarianceState& minus,
                    const CovarianceState& plus, double eps);

struct QfiResult {
  std::vector<double> qfi;       // I_omega after cycle m = 1..M (units omega^-2)
  std::vector<double> snr;       // Q_omega = omega^2 I_omega
  std::vector<double> qfi_dense; // per grid point, when requested
  Trajectory nominal;            // trajectory at the unperturbed omega
  bool eps_flagged{false};
  double eps_max_relative_change{0.0};
  /// Per cycle, |I(eps) - I(eps/10)| / max(|I|); empty unless check_eps.
  std::vector<double> eps_relative_change;

  /// Cycle m passed the eps check (always true when the check was not run).
  bool resolved(int m) const {
    return eps_relative_change.empty() || eps_relative_change.at(m - 1) <= 0.01;
  }
};

/// Integrates the trajectories at omega and omega +- eps and evaluates the QFI per cycle.
QfiResult qfi_frequency(const CovarianceState& initial, const ProtocolSchedule& schedule,
                        double omega, const NoiseParams& noise, const QfiOptions& options = {});

/// I^B(m) = 4 [int_0^{2 m tau} (2 N(t) + 1) dt]^2 (trapezoidal), for m = 1..M.
std::vector<double> qfi_bound(const Trajectory& trajectory);

/// Running bound at every grid point, for dense output.
std::vector<double> qfi_bound_dense(const Trajectory& trajectory);

/// 4 tau^2 3^(2m).
double qfi_bound_approx(double tau, int m);

struct AlphaFit {
  double alpha{0.0};      // slope of log_3 Q against m
  double intercept{0.0};
  double residual{0.0};   // RMS deviation of the fit in log_3 units
  int first{5};
  int last{10};
};

/**
 * Least-squares fit of log_3 Q_m against m over [first, last].
 *
 * q_per_cycle[i] holds the value for cycle m = i + 1. Throws ParameterError if the
 * window is out of range or any Q in it is not positive.
 */
AlphaFit fit_alpha(std::span<const double> q_per_cycle, int first = 5, int last = 10);

/// Slope of log Q against log T over cycles [first, last], with T = 2 m tau.
double loglog_slope(std::span<const double> q_per_cycle, double tau, int first, int last);

struct MetrologyReport {
  std::vector<double> qfi;
  std::vector<double> snr;
  std::vector<double> bound;
  std::vector<double> bound_approx;
  AlphaFit alpha_exact;
  AlphaFit alpha_bound;
  bool has_fit{false};
};

/// QFI, bound and fits in one pass; fits are computed when the schedule reaches `fit_last`.
MetrologyReport metrology_report(const CovarianceState& initial, const ProtocolSchedule& schedule,
                                 double omega, const NoiseParams& noise,
                                 const QfiOptions& options = {}, int fit_first = 5,
                                 int fit_last = 10, QfiResult* raw = nullptr);

struct AlphaPoint {
  double kappa_2tau{0.0};
  AlphaFit exact;
  AlphaFit bound;
};

/**
 * alpha(2 tau kappa) for a fixed omega tau and bath occupation. Grid points are
 * evaluated on `workers` threads and returned in grid order.
 */
std::vector<AlphaPoint> alpha_vs_kappa(std::span<const double> kappa_2tau_grid, double omega_tau,
                                       double n_th, const CovarianceState& initial,
                                       int cycles = 10, int workers = 1,
                                       const QfiOptions& options = {});

}  // namespace critcycle
