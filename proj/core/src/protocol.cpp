#include "critcycle/protocol.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "critcycle/errors.hpp"
#include "critcycle/gaussian_state.hpp"

namespace critcycle {

void validate(const ProtocolSchedule& schedule) {
  if (!(schedule.tau > 0.0) || !std::isfinite(schedule.tau)) {
    throw ParameterError("schedule: tau must be positive");
  }
  if (!(schedule.g_tau >= 0.0 && schedule.g_tau <= 1.0)) {
    throw ParameterError("schedule: g_tau must lie in [0, 1]");
  }
  if (schedule.cycles < 1) {
    throw ParameterError("schedule: at least one cycle is required");
  }
}

double ramp_profile(RampShape ramp, double u) {
  switch (ramp) {
    case RampShape::Linear:
      return u;
  }
  return u;
}

double g_of_t(const ProtocolSchedule& schedule, double t) {
  const double total = schedule.total_duration();
  if (!(t >= 0.0 && t <= total)) {
    std::ostringstream msg;
    msg << "g_of_t: t = " << t << " outside [0, " << total << "]";
    throw ParameterError(msg.str());
  }
  const double local = std::fmod(t, schedule.cycle_duration());
  const double u = local <= schedule.tau ? local / schedule.tau : 2.0 - local / schedule.tau;
  return schedule.g_tau * ramp_profile(schedule.ramp, u);
}

double phase_velocity(RampShape ramp) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto integrand = [ramp](double u) {
    const double g = ramp_profile(ramp, u);
    return std::sqrt(std::fmax(0.0, 1.0 - g * g));
  };
  return -2.0 * integrator.integrate(integrand, 0.0, 1.0);
}

double phase_prediction_unfolded(double omega_tau, RampShape ramp) {
  if (!(omega_tau > 0.0)) throw ParameterError("phase_prediction: omega_tau must be positive");
  return phase_velocity(ramp) * omega_tau + 0.5 * std::numbers::pi;
}

double phase_prediction(double omega_tau, RampShape ramp) {
  return fold_angle(phase_prediction_unfolded(omega_tau, ramp));
}

PhaseMatch is_phase_matched(double omega_tau, double tolerance) {
  if (!(omega_tau > 0.0) || !(tolerance > 0.0)) {
    throw ParameterError("is_phase_matched: omega_tau and tolerance must be positive");
  }
  PhaseMatch out;
  out.nearest_n = std::max(1L, std::lround(0.5 * omega_tau));
  out.distance = std::fabs(omega_tau - 2.0 * static_cast<double>(out.nearest_n));
  out.matched = out.distance <= tolerance;
  return out;
}

double nm_prediction(int m, double n_beta) {
  if (m < 0) throw ParameterError("nm_prediction: m must be non-negative");
  if (!(n_beta >= 0.0)) throw ParameterError("nm_prediction: n_beta must be non-negative");
  return 0.5 * ((2.0 * n_beta + 1.0) * std::cosh(m * std::log(3.0)) - 1.0);
}

int max_cycles(double eta) {
  if (!(eta > 1.0)) throw ParameterError("max_cycles: eta must exceed 1");
  // Integer powers of three are exact in double up to 3^33, so this avoids
  // log round-off at exact powers.
  int k = 0;
  double power = 3.0;
  while (power <= eta && k < 1000) {
    ++k;
    power *= 3.0;
  }
  return k;
}

}  // namespace critcycle
