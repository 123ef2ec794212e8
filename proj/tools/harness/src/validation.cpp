#include "critcycle/harness/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "critcycle/errors.hpp"
#include "critcycle/fock_oracle.hpp"
#include "critcycle/harness/experiment.hpp"
#include "critcycle/metrology.hpp"

namespace critcycle::harness {

namespace {

// Perturbation for the oracle's Bures QFI. The Fock states carry ~1e-12 round-off,
// so the fidelity deficit must sit well above it.
constexpr double kOracleEpsRel = 1e-4;
constexpr double kDimConvergence = 1e-6;
constexpr int kMaxOracleDim = 1024;

std::string describe(double value) {
  std::ostringstream s;
  s.precision(6);
  s << value;
  return s.str();
}

double relative_change(double a, double b) {
  const double scale = std::fmax(std::fabs(a), std::fabs(b));
  return scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
}

struct OracleRun {
  FockState center;
  double bures;
};

OracleRun oracle_run(const ProtocolSchedule& schedule, double omega, int dim) {
  const double eps = kOracleEpsRel * omega;
  const auto run = [&](double w) {
    FockEvolveOptions opt;
    opt.coupling_scale = std::sqrt(omega / w);
    return evolve_fock(fock_vacuum(dim), schedule, w, {}, opt);
  };
  FockState minus = run(omega - eps);
  FockState plus = run(omega + eps);
  return {run(omega), bures_qfi(minus, plus, eps)};
}

OracleComparison compare(const ProtocolSchedule& schedule, const ExperimentConfig& config,
                         const OracleRun& fock, int dim) {
  QfiOptions qopt;
  qopt.eps_rel = config.eps_rel;
  qopt.steps_per_half_cycle = resolve_steps(config);
  const QfiResult gaussian = qfi_frequency(vacuum_state(), schedule, config.omega, {}, qopt);

  OracleComparison out;
  out.cycles = schedule.cycles;
  out.dim = dim;
  const CovarianceState fock_cov = covariance_of(fock.center);
  out.covariance_max_difference =
      max_abs_difference(fock_cov.covariance(), gaussian.nominal.states.back().covariance());
  out.gaussian_qfi = gaussian.qfi.back();
  out.bures_qfi = fock.bures;
  out.qfi_relative_difference = std::fabs(out.bures_qfi - out.gaussian_qfi) / out.gaussian_qfi;
  out.fourth_cumulant = quadrature_fourth_cumulant(fock.center);
  out.x_variance = fock_cov.covariance().a;
  return out;
}

CheckResult timed(const std::string& name, const std::function<CheckResult()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult result;
  try {
    result = body();
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("error: ") + e.what();
  }
  result.name = name;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string sweep_csv_bytes(const ExperimentConfig& config, int workers) {
  std::ostringstream out;
  write_sweep_csv(out, run_sweep(config, workers));
  return out.str();
}

}  // namespace

double noiseless_purity_drift(const ExperimentConfig& config) {
  EvolveOptions opt;
  opt.steps_per_half_cycle = resolve_steps(config);
  const Trajectory traj =
      evolve(initial_state_of(config), schedule_of(config), config.omega, {}, opt);
  // Stored determinants carry the exact invariant, so the integrator's own drift of
  // det(S)^2 is what measures purity conservation; |dP| = P |d det| / 2 to first order.
  const double p0 = purity(traj.states.front());
  double drift = 0.5 * p0 * traj.max_det_drift;
  for (const CovarianceState& s : traj.states) drift = std::fmax(drift, std::fabs(purity(s) - p0));
  return drift;
}

double step_halving_ratio(const ExperimentConfig& config) {
  const double tau = config.tau();
  const int coarse = static_cast<int>(std::ceil(tau / max_step(tau, config.omega) - 1e-9));
  Matrix2 finals[3];
  for (int i = 0; i < 3; ++i) {
    EvolveOptions opt;
    opt.steps_per_half_cycle = coarse << i;
    finals[i] = evolve(initial_state_of(config), schedule_of(config), config.omega,
                       noise_of(config), opt)
                    .states.back()
                    .covariance();
  }
  return max_abs_difference(finals[0], finals[1]) / max_abs_difference(finals[1], finals[2]);
}

FiniteTimeFit finite_time_correction(const std::vector<double>& omega_tau_grid) {
  if (omega_tau_grid.size() < 2) throw ParameterError("finite_time_correction: need two points");
  FiniteTimeFit fit;
  const double target = 0.5 * std::log(3.0);
  std::vector<double> log_w;
  std::vector<double> log_d;
  for (double wt : omega_tau_grid) {
    const Trajectory traj = evolve(vacuum_state(), {wt, 1.0, 1, RampShape::Linear}, 1.0, {});
    const double deficit = target - squeezing_decomposition(traj.states.back()).magnitude;
    if (!(deficit > 0.0)) throw NumericalError("finite_time_correction: non-positive deficit");
    fit.omega_tau.push_back(wt);
    fit.deficit.push_back(deficit);
    log_w.push_back(std::log(wt));
    log_d.push_back(std::log(deficit));
  }
  const double n = static_cast<double>(log_w.size());
  const double mx = std::accumulate(log_w.begin(), log_w.end(), 0.0) / n;
  const double my = std::accumulate(log_d.begin(), log_d.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    sxx += (log_w[i] - mx) * (log_w[i] - mx);
    sxy += (log_w[i] - mx) * (log_d[i] - my);
  }
  fit.slope = sxy / sxx;
  // Prefactor with the exponent pinned at -2/3: log A = mean(log d + 2/3 log w).
  const double log_a = my + (2.0 / 3.0) * mx;
  fit.prefactor_ratio = std::exp(log_a) / std::pow(27.0, -2.0 / 3.0);
  return fit;
}

OracleComparison oracle_comparison(const ExperimentConfig& config, int cycles, int dim,
                                   bool check_dim_doubling) {
  const ProtocolSchedule schedule{config.tau(), config.g_tau, cycles, RampShape::Linear};
  const double omega = config.omega;

  OracleRun fock = oracle_run(schedule, omega, dim);
  if (check_dim_doubling) {
    // Strong transient squeezing near the critical point can need more levels than the
    // final state suggests, so double D until the reported scalars stop moving.
    for (;;) {
      const OracleRun wide = oracle_run(schedule, omega, 2 * dim);
      const Matrix2 r = covariance_of(fock.center).covariance();
      const Matrix2 r_wide = covariance_of(wide.center).covariance();
      const double change = std::max(
          {relative_change(fock_boson_number(fock.center), fock_boson_number(wide.center)),
           relative_change(fock.bures, wide.bures), relative_change(r.a, r_wide.a),
           relative_change(r.b, r_wide.b), relative_change(r.d, r_wide.d)});
      if (change < kDimConvergence || 2 * dim > kMaxOracleDim) {
        OracleComparison out = compare(schedule, config, fock, dim);
        out.dim_doubling_change = change;
        return out;
      }
      dim *= 2;
      fock = wide;
    }
  }
  return compare(schedule, config, fock, dim);
}

std::vector<CheckResult> run_validation(const ExperimentConfig& config, ValidationLevel level,
                                        int workers) {
  std::vector<CheckResult> checks;

  checks.push_back(timed("purity_drift", [&] {
    const double drift = noiseless_purity_drift(config);
    return CheckResult{{}, drift <= 1e-7, "max |P - P0| = " + describe(drift) + " (limit 1e-7)"};
  }));

  checks.push_back(timed("bound_dominance", [&] {
    const RunOutcome run = run_experiment(config);
    int violations = 0;
    for (std::size_t i = 0; i < run.qfi.size(); ++i) {
      if (run.qfi[i] > run.bound[i] * (1.0 + 1e-9)) ++violations;
    }
    return CheckResult{{}, violations == 0,
                       std::to_string(violations) + " of " + std::to_string(run.qfi.size()) +
                           " cycles with I_omega > I_bound"};
  }));

  checks.push_back(timed("step_halving", [&] {
    const double ratio = step_halving_ratio(config);
    return CheckResult{{}, std::fabs(ratio - 16.0) <= 4.0,
                       "error ratio " + describe(ratio) + " (expected 16 +- 4)"};
  }));

  checks.push_back(timed("sweep_determinism", [&] {
    ExperimentConfig grid = config;
    grid.sweep = {{"kappa_2tau", {0.0, 0.5, 1.0}}};
    const std::string serial = sweep_csv_bytes(grid, 1);
    bool same = true;
    for (int w : {2, 8, workers}) same = same && sweep_csv_bytes(grid, w) == serial;
    return CheckResult{{}, same, same ? "identical CSV for 1, 2, 8 and " + std::to_string(workers) +
                                            " workers"
                                      : "CSV differs between worker counts"};
  }));

  if (level == ValidationLevel::Full) {
    for (int m = 1; m <= 3; ++m) {
      checks.push_back(timed("oracle_m" + std::to_string(m), [&] {
        const OracleComparison c = oracle_comparison(config, m, default_fock_dim(m));
        const double gauss_limit = 1e-3 * c.x_variance * c.x_variance;
        const bool ok = c.covariance_max_difference <= 1e-4 && c.qfi_relative_difference <= 0.01 &&
                        std::fabs(c.fourth_cumulant) <= gauss_limit &&
                        c.dim_doubling_change < 1e-6;
        std::ostringstream d;
        d << "max |dR| " << describe(c.covariance_max_difference) << ", QFI rel diff "
          << describe(c.qfi_relative_difference) << ", cumulant " << describe(c.fourth_cumulant)
          << " (limit " << describe(gauss_limit) << "), D->2D change "
          << describe(c.dim_doubling_change) << " at D = " << c.dim;
        return CheckResult{{}, ok, d.str()};
      }));
    }
    checks.push_back(timed("finite_time_correction", [&] {
      const FiniteTimeFit fit = finite_time_correction({4, 6, 8, 12, 16, 24, 32, 48, 64});
      const bool ok = std::fabs(fit.slope + 2.0 / 3.0) <= 0.05 &&
                      std::fabs(fit.prefactor_ratio - 1.0) <= 0.2;
      return CheckResult{{}, ok,
                         "slope " + describe(fit.slope) + ", prefactor ratio " +
                             describe(fit.prefactor_ratio)};
    }));
  }
  return checks;
}

std::string validation_report_json(const std::vector<CheckResult>& checks, ValidationLevel level) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
    all = all && c.passed;
  }
  nlohmann::json doc = {{"schema", kSummarySchema},
                        {"command", "validate"},
                        {"level", level == ValidationLevel::Full ? "full" : "fast"},
                        {"passed", all},
                        {"checks", list}};
  return doc.dump(2) + "\n";
}

}  // namespace critcycle::harness
