#include "critcycle/metrology.hpp"

#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

#include "critcycle/errors.hpp"
#include "critcycle/parallel.hpp"

namespace critcycle {

namespace {

constexpr double kPureStateThreshold = 1.0 - 1e-9;
// QFI values below this are round-off of a vanishing derivative; the eps check skips them.
constexpr double kQfiNoiseFloor = 1e-9;

struct LineFit {
  double slope;
  double intercept;
  double rms;
};

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit fit{sxy / sxx, 0.0, 0.0};
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

void check_window(std::span<const double> q, int first, int last) {
  if (first < 1 || last <= first || static_cast<std::size_t>(last) > q.size()) {
    std::ostringstream msg;
    msg << "fit window [" << first << ", " << last << "] invalid for " << q.size() << " cycles";
    throw ParameterError(msg.str());
  }
  for (int m = first; m <= last; ++m) {
    if (!(q[m - 1] > 0.0) || !std::isfinite(q[m - 1])) {
      std::ostringstream msg;
      msg << "fit window contains non-positive value at m = " << m;
      throw ParameterError(msg.str());
    }
  }
}

struct PerturbedRun {
  Trajectory minus;
  Trajectory plus;
};

PerturbedRun run_pair(const CovarianceState& initial, const ProtocolSchedule& schedule,
                      double omega, double eps, const NoiseParams& noise,
                      CouplingConvention convention, int steps) {
  const auto run = [&](double shifted) {
    EvolveOptions opt;
    opt.steps_per_half_cycle = steps;
    if (convention == CouplingConvention::FixedPhysical) {
      opt.coupling_scale = std::sqrt(omega / shifted);
    }
    return evolve(initial, schedule, shifted, noise, opt);
  };
  auto plus = std::async(std::launch::async, run, omega + eps);
  Trajectory minus = run(omega - eps);
  return {std::move(minus), plus.get()};
}

std::vector<double> qfi_per_cycle(const Trajectory& center, const PerturbedRun& pair, double eps) {
  std::vector<double> out;
  out.reserve(center.cycles);
  for (int m = 1; m <= center.cycles; ++m) {
    out.push_back(gaussian_qfi(center.state_after_cycle(m), pair.minus.state_after_cycle(m),
                               pair.plus.state_after_cycle(m), eps));
  }
  return out;
}

}  // namespace

double gaussian_qfi(const CovarianceState& center, const CovarianceState& minus,
                    const CovarianceState& plus, double eps) {
  const Matrix2 d_r = (0.5 / eps) * (plus.covariance() - minus.covariance());
  const double p = purity(center);
  const double d_p = (purity(plus) - purity(minus)) / (2.0 * eps);
  const Matrix2 m = center.covariance().inverse(center.determinant()) * d_r;
  double qfi = 0.5 * (m * m).trace() / (1.0 + p * p);
  if (p <= kPureStateThreshold) {
    qfi += 2.0 * d_p * d_p / (1.0 - p * p * p * p);
  }
  if (!std::isfinite(qfi)) throw NumericalError("gaussian_qfi: non-finite result");
  return qfi;
}

QfiResult qfi_frequency(const CovarianceState& initial, const ProtocolSchedule& schedule,
                        double omega, const NoiseParams& noise, const QfiOptions& options) {
  if (!(options.eps_rel > 0.0) || options.eps_rel >= 0.1) {
    throw ParameterError("qfi_frequency: eps_rel must lie in (0, 0.1)");
  }
  const int steps = options.steps_per_half_cycle > 0
                        ? options.steps_per_half_cycle
                        : default_steps_per_half_cycle(schedule.tau, omega);
  const double eps = options.eps_rel * omega;

  QfiResult out;
  EvolveOptions nominal_opt;
  nominal_opt.steps_per_half_cycle = steps;
  out.nominal = evolve(initial, schedule, omega, noise, nominal_opt);
  const PerturbedRun pair =
      run_pair(initial, schedule, omega, eps, noise, options.convention, steps);
  out.qfi = qfi_per_cycle(out.nominal, pair, eps);
  out.snr.reserve(out.qfi.size());
  for (double i : out.qfi) out.snr.push_back(omega * omega * i);
  if (options.dense) {
    out.qfi_dense.reserve(out.nominal.states.size());
    for (std::size_t k = 0; k < out.nominal.states.size(); ++k) {
      out.qfi_dense.push_back(
          gaussian_qfi(out.nominal.states[k], pair.minus.states[k], pair.plus.states[k], eps));
    }
  }

  if (options.check_eps) {
    const PerturbedRun fine =
        run_pair(initial, schedule, omega, 0.1 * eps, noise, options.convention, steps);
    const std::vector<double> refined = qfi_per_cycle(out.nominal, fine, 0.1 * eps);
    out.eps_relative_change.assign(refined.size(), 0.0);
    for (std::size_t i = 0; i < refined.size(); ++i) {
      const double scale = std::fmax(std::fabs(out.qfi[i]), std::fabs(refined[i]));
      if (scale > kQfiNoiseFloor) {
        out.eps_relative_change[i] = std::fabs(out.qfi[i] - refined[i]) / scale;
        out.eps_max_relative_change =
            std::fmax(out.eps_max_relative_change, out.eps_relative_change[i]);
      }
    }
    out.eps_flagged = out.eps_max_relative_change > 0.01;
  }
  return out;
}

std::vector<double> qfi_bound_dense(const Trajectory& trajectory) {
  std::vector<double> out;
  out.reserve(trajectory.states.size());
  double integral = 0.0;
  double previous = 2.0 * boson_number(trajectory.states.front()) + 1.0;
  out.push_back(0.0);
  for (std::size_t k = 1; k < trajectory.states.size(); ++k) {
    const double current = 2.0 * boson_number(trajectory.states[k]) + 1.0;
    integral += 0.5 * (trajectory.times[k] - trajectory.times[k - 1]) * (previous + current);
    previous = current;
    out.push_back(4.0 * integral * integral);
  }
  return out;
}

std::vector<double> qfi_bound(const Trajectory& trajectory) {
  const std::vector<double> dense = qfi_bound_dense(trajectory);
  std::vector<double> out;
  out.reserve(trajectory.cycles);
  for (int m = 1; m <= trajectory.cycles; ++m) out.push_back(dense.at(trajectory.cycle_index(m)));
  return out;
}

double qfi_bound_approx(double tau, int m) {
  if (m < 1) throw ParameterError("qfi_bound_approx: m must be at least 1");
  return 4.0 * tau * tau * std::pow(9.0, m);
}

AlphaFit fit_alpha(std::span<const double> q_per_cycle, int first, int last) {
  check_window(q_per_cycle, first, last);
  std::vector<double> ms;
  std::vector<double> logs;
  for (int m = first; m <= last; ++m) {
    ms.push_back(m);
    logs.push_back(std::log(q_per_cycle[m - 1]) / std::log(3.0));
  }
  const LineFit fit = least_squares(ms, logs);
  return {fit.slope, fit.intercept, fit.rms, first, last};
}

double loglog_slope(std::span<const double> q_per_cycle, double tau, int first, int last) {
  check_window(q_per_cycle, first, last);
  std::vector<double> log_t;
  std::vector<double> log_q;
  for (int m = first; m <= last; ++m) {
    log_t.push_back(std::log(2.0 * m * tau));
    log_q.push_back(std::log(q_per_cycle[m - 1]));
  }
  return least_squares(log_t, log_q).slope;
}

MetrologyReport metrology_report(const CovarianceState& initial, const ProtocolSchedule& schedule,
                                 double omega, const NoiseParams& noise, const QfiOptions& options,
                                 int fit_first, int fit_last, QfiResult* raw) {
  QfiResult result = qfi_frequency(initial, schedule, omega, noise, options);
  MetrologyReport report;
  report.qfi = result.qfi;
  report.snr = result.snr;
  report.bound = qfi_bound(result.nominal);
  for (int m = 1; m <= schedule.cycles; ++m) {
    report.bound_approx.push_back(qfi_bound_approx(schedule.tau, m));
  }
  if (schedule.cycles >= fit_last) {
    std::vector<double> bound_snr;
    for (double b : report.bound) bound_snr.push_back(omega * omega * b);
    report.alpha_exact = fit_alpha(report.snr, fit_first, fit_last);
    report.alpha_bound = fit_alpha(bound_snr, fit_first, fit_last);
    report.has_fit = true;
  }
  if (raw != nullptr) *raw = std::move(result);
  return report;
}

std::vector<AlphaPoint> alpha_vs_kappa(std::span<const double> kappa_2tau_grid, double omega_tau,
                                       double n_th, const CovarianceState& initial, int cycles,
                                       int workers, const QfiOptions& options) {
  for (double k : kappa_2tau_grid) {
    if (!(k >= 0.0 && k <= 4.0)) throw ParameterError("alpha_vs_kappa: 2 tau kappa must lie in [0, 4]");
  }
  std::vector<AlphaPoint> out(kappa_2tau_grid.size());
  parallel_for_index(out.size(), workers, [&](std::size_t i) {
    const double omega = 1.0;
    const ProtocolSchedule schedule{omega_tau / omega, 1.0, cycles, RampShape::Linear};
    const NoiseParams noise{kappa_2tau_grid[i] / (2.0 * schedule.tau), n_th};
    const MetrologyReport report = metrology_report(initial, schedule, omega, noise, options);
    out[i] = {kappa_2tau_grid[i], report.alpha_exact, report.alpha_bound};
  });
  return out;
}

}  // namespace critcycle
