#pragma once

namespace critcycle {

enum class RampShape { Linear };

/**
 * Periodic coupling schedule: each cycle ramps g from 0 to g_tau in tau and back
 * to 0 in another tau. The schedule is repeated `cycles` times.
 */
struct ProtocolSchedule {
  double tau{1.0};
  double g_tau{1.0};
  int cycles{1};
  RampShape ramp{RampShape::Linear};

  double cycle_duration() const { return 2.0 * tau; }
  double total_duration() const { return 2.0 * cycles * tau; }
};

/// Throws ParameterError if tau <= 0, g_tau outside [0, 1] or cycles < 1.
void validate(const ProtocolSchedule& schedule);

/// Normalised ramp profile on the rising half, u in [0, 1] -> [0, 1].
double ramp_profile(RampShape ramp, double u);

/// g(t) on [0, T]; throws ParameterError outside that interval.
double g_of_t(const ProtocolSchedule& schedule, double t);

/// nu = -2 int_0^1 sqrt(1 - g(u)^2) du for a ramp peaking at the critical point.
double phase_velocity(RampShape ramp);

/// Predicted post-cycle squeezing angle nu * omega_tau + pi/2, folded into (-pi, pi].
double phase_prediction(double omega_tau, RampShape ramp = RampShape::Linear);

/// Same as phase_prediction but not folded; affine in omega_tau.
double phase_prediction_unfolded(double omega_tau, RampShape ramp = RampShape::Linear);

struct PhaseMatch {
  bool matched{false};
  double distance{0.0};  // |omega_tau - 2n| for the nearest n >= 1
  long nearest_n{1};
};

/// Phase matching holds at omega_tau = 2n, n = 1, 2, ...
PhaseMatch is_phase_matched(double omega_tau, double tolerance);

/// N_m = ((2 N_beta + 1) cosh(m log 3) - 1) / 2.
double nm_prediction(int m, double n_beta = 0.0);

/// floor(log_3 eta); throws ParameterError for eta <= 1.
int max_cycles(double eta);

}  // namespace critcycle
