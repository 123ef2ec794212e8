#include "critcycle/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <nlohmann/json.hpp>

#include "critcycle/errors.hpp"
#include "critcycle/parallel.hpp"

namespace critcycle::harness {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

json fit_json(const std::optional<AlphaFit>& fit) {
  if (!fit) return nullptr;
  return {{"alpha", fit->alpha},
          {"intercept", fit->intercept},
          {"rms_residual", fit->residual},
          {"first", fit->first},
          {"last", fit->last}};
}

json config_json(const ExperimentConfig& c) {
  return {{"omega", c.omega},
          {"tau_omega", c.tau_omega},
          {"g_tau", c.g_tau},
          {"cycles", c.cycles},
          {"kappa_2tau", c.kappa_2tau},
          {"n_th", c.n_th},
          {"n_beta", c.n_beta},
          {"eps_rel", c.eps_rel},
          {"steps_per_half_cycle", resolve_steps(c)},
          {"coupling", c.coupling == CouplingConvention::FixedPhysical ? "fixed_lambda" : "fixed_g"},
          {"fit_first", c.fit_first},
          {"fit_last", c.fit_last}};
}

json run_json(const RunOutcome& run) {
  json cycles = json::array();
  for (std::size_t i = 0; i < run.cycles.size(); ++i) {
    cycles.push_back({{"cycle", run.cycles[i].cycle},
                      {"N", run.cycles[i].boson_number},
                      {"purity", run.cycles[i].purity},
                      {"Q_omega", run.qfi_resolved[i] ? json(run.snr[i]) : json(nullptr)},
                      {"I_bound", run.bound[i]}});
  }
  const double theta_1 = run.cycles.empty() ? 0.0 : run.cycles.front().squeezing.angle;
  return {{"schema", kSummarySchema},
          {"command", "run"},
          {"config", config_json(run.config)},
          {"alpha", fit_json(run.alpha_exact)},
          {"alpha_bound", fit_json(run.alpha_bound)},
          {"fit_note", run.fit_note},
          {"phase_match",
           {{"omega_tau", run.config.tau_omega},
            {"matched", run.phase.matched},
            {"distance", run.phase.distance},
            {"nearest_n", run.phase.nearest_n},
            {"tolerance", run.config.phase_tolerance},
            {"predicted_theta", run.phase_predicted},
            {"observed_theta_cycle1", theta_1}}},
          {"eps_check",
           {{"flagged", run.eps_flagged}, {"max_relative_change", run.eps_max_relative_change}}},
          {"cycles", cycles},
          {"warnings", run.warnings},
          {"runtime_seconds", run.runtime_seconds}};
}

}  // namespace

ProtocolSchedule schedule_of(const ExperimentConfig& c) {
  return {c.tau(), c.g_tau, c.cycles, RampShape::Linear};
}

NoiseParams noise_of(const ExperimentConfig& c) { return {c.kappa(), c.n_th}; }

CovarianceState initial_state_of(const ExperimentConfig& c) { return thermal_state(c.n_beta); }

QfiOptions qfi_options_of(const ExperimentConfig& c) {
  QfiOptions opt;
  opt.eps_rel = c.eps_rel;
  opt.convention = c.coupling;
  opt.steps_per_half_cycle = resolve_steps(c);
  opt.check_eps = true;
  opt.dense = c.dense;
  return opt;
}

double grid_coupling(const ExperimentConfig& config, std::size_t k, int n) {
  const std::size_t half = k / static_cast<std::size_t>(n);
  const std::size_t j = k % static_cast<std::size_t>(n);
  if (j == 0) return half % 2 == 1 ? config.g_tau : 0.0;
  const double u = static_cast<double>(j) / n;
  const double shape = ramp_profile(RampShape::Linear, half % 2 == 0 ? u : 1.0 - u);
  return config.g_tau * shape;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  RunOutcome run;
  run.config = config;
  const ProtocolSchedule schedule = schedule_of(config);

  QfiResult raw = qfi_frequency(initial_state_of(config), schedule, config.omega, noise_of(config),
                                qfi_options_of(config));
  run.cycles = cycle_samples(raw.nominal);
  run.qfi = raw.qfi;
  run.snr = raw.snr;
  run.bound = qfi_bound(raw.nominal);
  for (int m = 1; m <= config.cycles; ++m) {
    run.bound_approx.push_back(qfi_bound_approx(schedule.tau, m));
  }
  for (int m = 1; m <= config.cycles; ++m) run.qfi_resolved.push_back(raw.resolved(m));
  const auto first_unresolved = std::find(run.qfi_resolved.begin(), run.qfi_resolved.end(), false);
  const int unresolved_from = static_cast<int>(first_unresolved - run.qfi_resolved.begin()) + 1;
  if (config.cycles < config.fit_last) {
    run.fit_note = "fewer cycles than fit_last; no fit";
  } else {
    std::vector<double> bound_snr;
    for (double b : run.bound) bound_snr.push_back(config.omega * config.omega * b);
    const bool window_resolved =
        std::all_of(run.qfi_resolved.begin() + config.fit_first - 1,
                    run.qfi_resolved.begin() + config.fit_last, [](bool r) { return r; });
    try {
      run.alpha_bound = fit_alpha(bound_snr, config.fit_first, config.fit_last);
      if (window_resolved) {
        run.alpha_exact = fit_alpha(run.snr, config.fit_first, config.fit_last);
      } else {
        run.fit_note = "QFI not resolved by the finite difference inside the fit window";
      }
    } catch (const ParameterError& e) {
      run.alpha_exact.reset();
      run.fit_note = e.what();
    }
  }
  run.phase = is_phase_matched(config.tau_omega, config.phase_tolerance);
  run.phase_predicted = phase_prediction(config.tau_omega);
  run.eps_flagged = raw.eps_flagged;
  run.eps_max_relative_change = raw.eps_max_relative_change;
  run.warnings = raw.nominal.warnings;
  if (first_unresolved != run.qfi_resolved.end()) {
    run.warnings.push_back("QFI changed by more than 1% when eps was reduced tenfold (first at cycle " +
                           std::to_string(unresolved_from) +
                           "); those values are left blank");
  }
  if (config.dense) {
    run.bound_dense = qfi_bound_dense(raw.nominal);
    run.qfi_dense = std::move(raw.qfi_dense);
    run.trajectory = std::move(raw.nominal);
  }
  run.runtime_seconds = seconds_since(start);
  return run;
}

void write_run_csv(std::ostream& out, const RunOutcome& run) {
  const ExperimentConfig& c = run.config;
  out << "# " << kRunCsvSchema << '\n';
  out << "cycle,t,g,N,purity,s_mag,theta,Q_omega,I_bound,I_bound_approx\n";
  const double w2 = c.omega * c.omega;
  if (!c.dense) {
    for (std::size_t i = 0; i < run.cycles.size(); ++i) {
      const CycleRecord& r = run.cycles[i];
      out << r.cycle << ',' << format_number(r.time) << ",0," << format_number(r.boson_number)
          << ',' << format_number(r.purity) << ',' << format_number(r.squeezing.magnitude) << ','
          << format_number(r.squeezing.angle) << ','
          << (run.qfi_resolved[i] ? format_number(run.snr[i]) : "") << ','
          << format_number(run.bound[i]) << ',' << format_number(run.bound_approx[i]) << '\n';
    }
    return;
  }
  const Trajectory& traj = run.trajectory;
  const int n = traj.steps_per_half_cycle;
  const double tau = c.tau();
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const CovarianceState& s = traj.states[k];
    const SqueezingDecomposition sq = squeezing_decomposition(s);
    const bool boundary = k % (2U * static_cast<std::size_t>(n)) == 0;
    if (boundary) out << k / (2U * static_cast<std::size_t>(n));
    const double t = traj.times[k];
    out << ',' << format_number(t) << ',' << format_number(grid_coupling(c, k, n)) << ','
        << format_number(boson_number(s)) << ',' << format_number(purity(s)) << ','
        << format_number(sq.magnitude) << ',' << format_number(sq.angle) << ','
        << format_number(w2 * run.qfi_dense[k]) << ',' << format_number(run.bound_dense[k]) << ','
        << format_number(4.0 * tau * tau * std::pow(3.0, t / tau)) << '\n';
  }
}

std::string run_summary_json(const RunOutcome& run) {
  json doc = run_json(run);
  doc["schema"] = kSummarySchema;
  doc["command"] = "run";
  return doc.dump(2) + "\n";
}

bool SweepOutcome::all_ok() const {
  for (const SweepPoint& p : points) {
    if (!p.ok) return false;
  }
  return true;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.sweep.clear();
  std::vector<ExperimentConfig> grid{base};
  for (const SweepAxis& axis : config.sweep) {
    std::vector<ExperimentConfig> next;
    next.reserve(grid.size() * axis.values.size());
    for (const ExperimentConfig& g : grid) {
      for (double v : axis.values) {
        ExperimentConfig point = g;
        set_config_value(point, axis.key, format_number(v));
        next.push_back(std::move(point));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

SweepOutcome run_sweep(const ExperimentConfig& config, int workers) {
  const auto start = Clock::now();
  SweepOutcome sweep;
  for (const SweepAxis& axis : config.sweep) sweep.axes.push_back(axis.key);
  const std::vector<ExperimentConfig> grid = expand_grid(config);

  sweep.points.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sweep.points[i].index = i;
    // Recover axis values by position: first axis is outermost.
    std::size_t stride = grid.size();
    for (const SweepAxis& axis : config.sweep) {
      stride /= axis.values.size();
      sweep.points[i].axis_values.push_back(axis.values[(i / stride) % axis.values.size()]);
    }
  }
  parallel_for_index(grid.size(), workers, [&](std::size_t i) {
    SweepPoint& point = sweep.points[i];
    try {
      ExperimentConfig cfg = grid[i];
      cfg.dense = false;  // sweeps only emit cycle rows
      point.run = run_experiment(cfg);
      point.ok = true;
    } catch (const std::exception& e) {
      point.ok = false;
      point.message = e.what();
    }
  });
  sweep.runtime_seconds = seconds_since(start);
  return sweep;
}

void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep) {
  out << "# " << kSweepCsvSchema << '\n';
  out << "point";
  for (const std::string& axis : sweep.axes) out << ',' << axis;
  out << ",status,cycle,t,N,purity,Q_omega,I_bound,alpha,alpha_bound,message\n";
  for (const SweepPoint& p : sweep.points) {
    std::string prefix = std::to_string(p.index);
    for (double v : p.axis_values) prefix += ',' + format_number(v);
    if (!p.ok) {
      out << prefix << ",failed,,,,,,,,," << csv_field(p.message) << '\n';
      continue;
    }
    const RunOutcome& run = *p.run;
    const std::string alpha = run.alpha_exact ? format_number(run.alpha_exact->alpha) : "";
    const std::string alpha_bound = run.alpha_bound ? format_number(run.alpha_bound->alpha) : "";
    for (std::size_t i = 0; i < run.cycles.size(); ++i) {
      const CycleRecord& r = run.cycles[i];
      out << prefix << ",ok," << r.cycle << ',' << format_number(r.time) << ','
          << format_number(r.boson_number) << ',' << format_number(r.purity) << ','
          << (run.qfi_resolved[i] ? format_number(run.snr[i]) : "") << ',' << format_number(run.bound[i]) << ',' << alpha
          << ',' << alpha_bound << ',' << csv_field(run.fit_note) << '\n';
    }
  }
}

std::string sweep_summary_json(const SweepOutcome& sweep) {
  json points = json::array();
  std::size_t failed = 0;
  for (const SweepPoint& p : sweep.points) {
    json entry = {{"point", p.index}, {"status", p.ok ? "ok" : "failed"}};
    json axes = json::object();
    for (std::size_t a = 0; a < sweep.axes.size(); ++a) axes[sweep.axes[a]] = p.axis_values[a];
    entry["axes"] = axes;
    if (p.ok) {
      entry["alpha"] = fit_json(p.run->alpha_exact);
      entry["alpha_bound"] = fit_json(p.run->alpha_bound);
      entry["phase_matched"] = p.run->phase.matched;
      entry["warnings"] = p.run->warnings;
    } else {
      entry["message"] = p.message;
      ++failed;
    }
    points.push_back(std::move(entry));
  }
  json doc = {{"schema", kSummarySchema},
              {"command", "sweep"},
              {"axes", sweep.axes},
              {"points", points},
              {"failed", failed},
              {"runtime_seconds", sweep.runtime_seconds}};
  return doc.dump(2) + "\n";
}

}  // namespace critcycle::harness
