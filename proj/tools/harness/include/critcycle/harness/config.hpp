#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critcycle/metrology.hpp"

namespace critcycle::harness {

/// Bad key, malformed value or out-of-range parameter. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

/**
 * Experiment parameters in dimensionless groups. omega sets the unit of time;
 * tau = tau_omega / omega and kappa = kappa_2tau / (2 tau).
 */
struct ExperimentConfig {
  double omega{1.0};
  double tau_omega{8.0};
  double g_tau{1.0};
  int cycles{10};
  double kappa_2tau{0.0};
  double n_th{0.0};
  double n_beta{0.0};
  double eps_rel{1e-8};
  int step_divisor{0};  // integration steps per half cycle; 0 = automatic
  CouplingConvention coupling{CouplingConvention::FixedPhysical};
  int fit_first{5};
  int fit_last{10};
  double phase_tolerance{0.05};
  std::vector<SweepAxis> sweep;
  std::filesystem::path out_dir{"."};
  std::uint64_t seed{0};  // reserved; every computation is deterministic
  bool dense{false};

  double tau() const { return tau_omega / omega; }
  double kappa() const { return kappa_2tau / (2.0 * tau()); }
};

/// Keys accepted by the parser, in print order. Sweep axes use "sweep.<key>".
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value; throws ConfigError on unknown keys or bad values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines ('#' starts a comment). Duplicate keys are rejected.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

/// Applies a "key=value" command-line override.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Range checks; throws ConfigError naming the offending key.
void validate_config(const ExperimentConfig& config);

/// Round-trippable key = value text.
std::string to_config_text(const ExperimentConfig& config);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

int resolve_steps(const ExperimentConfig& config);

}  // namespace critcycle::harness
