#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "critcycle/harness/config.hpp"
#include "critcycle/metrology.hpp"
#include "critcycle/propagator.hpp"
#include "critcycle/protocol.hpp"

namespace critcycle::harness {

inline constexpr const char* kRunCsvSchema = "critcycle-run-csv v1";
inline constexpr const char* kSweepCsvSchema = "critcycle-sweep-csv v1";
inline constexpr const char* kSummarySchema = "critcycle-summary v1";

ProtocolSchedule schedule_of(const ExperimentConfig& config);
NoiseParams noise_of(const ExperimentConfig& config);
CovarianceState initial_state_of(const ExperimentConfig& config);
QfiOptions qfi_options_of(const ExperimentConfig& config);

struct RunOutcome {
  ExperimentConfig config;
  std::vector<CycleRecord> cycles;
  std::vector<double> qfi;
  std::vector<double> snr;
  std::vector<double> bound;
  std::vector<double> bound_approx;
  std::optional<AlphaFit> alpha_exact;
  std::optional<AlphaFit> alpha_bound;
  std::string fit_note;  // why a fit is missing
  PhaseMatch phase;
  double phase_predicted{0.0};
  bool eps_flagged{false};
  double eps_max_relative_change{0.0};
  /// Per cycle: QFI stable under eps -> eps/10. Unresolved values are not reported.
  std::vector<bool> qfi_resolved;
  std::vector<std::string> warnings;
  double runtime_seconds{0.0};

  // Filled only for dense runs.
  Trajectory trajectory;
  std::vector<double> qfi_dense;
  std::vector<double> bound_dense;
};

/// Runs one configuration. Core exceptions propagate unchanged.
RunOutcome run_experiment(const ExperimentConfig& config);

/// Coupling at grid index k of a trajectory with n steps per half cycle.
double grid_coupling(const ExperimentConfig& config, std::size_t k, int n);

/// Cycle-boundary rows, or every grid point when the run is dense.
void write_run_csv(std::ostream& out, const RunOutcome& run);

/// JSON summary: fits, phase-match report, eps check, warnings, runtime.
std::string run_summary_json(const RunOutcome& run);

struct SweepPoint {
  std::size_t index{0};
  std::vector<double> axis_values;
  bool ok{false};
  std::string message;
  std::optional<RunOutcome> run;
};

struct SweepOutcome {
  std::vector<std::string> axes;
  std::vector<SweepPoint> points;  // grid order, first axis outermost
  double runtime_seconds{0.0};

  bool all_ok() const;
};

/// Cartesian grid of the sweep axes; an empty sweep is a single point.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& config);

/// Evaluates the grid on `workers` threads. Failures are recorded per point.
SweepOutcome run_sweep(const ExperimentConfig& config, int workers);

/// Long format: one row per (point, cycle); failed points get a single row.
void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep);

std::string sweep_summary_json(const SweepOutcome& sweep);

}  // namespace critcycle::harness
