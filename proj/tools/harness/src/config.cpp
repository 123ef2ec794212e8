#include "critcycle/harness/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "critcycle/propagator.hpp"

namespace critcycle::harness {

namespace {

constexpr std::string_view kSweepPrefix = "sweep.";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  std::ostringstream msg;
  msg << "config key '" << key << "': cannot use value '" << value << "' (" << why << ")";
  throw ConfigError(msg.str());
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    bad_value(key, text, "expected a number");
  }
  if (!std::isfinite(value)) bad_value(key, text, "must be finite");
  return value;
}

long long parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    bad_value(key, text, "expected an integer");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(key, text, "expected true or false");
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_double(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, text, "empty sweep axis");
  return out;
}

const std::array<std::string_view, 8> kSweepable = {
    "omega", "tau_omega", "g_tau", "cycles", "kappa_2tau", "n_th", "n_beta", "eps_rel"};

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "omega",     "tau_omega", "g_tau",    "cycles",  "kappa_2tau",      "n_th",
      "n_beta",    "eps_rel",   "step_divisor", "coupling", "fit_first", "fit_last",
      "phase_tolerance", "out_dir", "seed", "dense"};
  return keys;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key.starts_with(kSweepPrefix)) {
    const std::string_view axis = key.substr(kSweepPrefix.size());
    if (std::find(kSweepable.begin(), kSweepable.end(), axis) == kSweepable.end()) {
      std::ostringstream msg;
      msg << "config key '" << key << "': '" << axis << "' cannot be swept";
      throw ConfigError(msg.str());
    }
    std::vector<double> values = parse_list(key, value);
    auto existing = std::find_if(config.sweep.begin(), config.sweep.end(),
                                 [&](const SweepAxis& a) { return a.key == axis; });
    if (existing != config.sweep.end()) {
      existing->values = std::move(values);
    } else {
      config.sweep.push_back({std::string(axis), std::move(values)});
    }
    return;
  }
  if (key == "omega") {
    config.omega = parse_double(key, value);
  } else if (key == "tau_omega") {
    config.tau_omega = parse_double(key, value);
  } else if (key == "g_tau") {
    config.g_tau = parse_double(key, value);
  } else if (key == "cycles") {
    config.cycles = static_cast<int>(parse_integer(key, value));
  } else if (key == "kappa_2tau") {
    config.kappa_2tau = parse_double(key, value);
  } else if (key == "n_th") {
    config.n_th = parse_double(key, value);
  } else if (key == "n_beta") {
    config.n_beta = parse_double(key, value);
  } else if (key == "eps_rel") {
    config.eps_rel = parse_double(key, value);
  } else if (key == "step_divisor") {
    config.step_divisor = static_cast<int>(parse_integer(key, value));
  } else if (key == "coupling") {
    if (value == "fixed_lambda") {
      config.coupling = CouplingConvention::FixedPhysical;
    } else if (value == "fixed_g") {
      config.coupling = CouplingConvention::FixedRescaled;
    } else {
      bad_value(key, value, "expected fixed_lambda or fixed_g");
    }
  } else if (key == "fit_first") {
    config.fit_first = static_cast<int>(parse_integer(key, value));
  } else if (key == "fit_last") {
    config.fit_last = static_cast<int>(parse_integer(key, value));
  } else if (key == "phase_tolerance") {
    config.phase_tolerance = parse_double(key, value);
  } else if (key == "out_dir") {
    if (value.empty()) bad_value(key, value, "empty path");
    config.out_dir = std::filesystem::path(std::string(value));
  } else if (key == "seed") {
    const long long seed = parse_integer(key, value);
    if (seed < 0) bad_value(key, value, "must be non-negative");
    config.seed = static_cast<std::uint64_t>(seed);
  } else if (key == "dense") {
    config.dense = parse_bool(key, value);
  } else {
    std::ostringstream msg;
    msg << "unknown config key '" << key << "'";
    throw ConfigError(msg.str());
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream msg;
      msg << "config line " << line_no << ": expected 'key = value'";
      throw ConfigError(msg.str());
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) {
      std::ostringstream msg;
      msg << "config line " << line_no << ": duplicate key '" << key << "'";
      throw ConfigError(msg.str());
    }
    set_config_value(base, key, line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream contents;
  contents << in.rdbuf();
  return parse_config(contents.str(), std::move(base));
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void validate_config(const ExperimentConfig& c) {
  const auto require = [](bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
  };
  require(c.omega > 0.0, "omega must be positive");
  require(c.tau_omega > 0.0 && c.tau_omega <= 100.0, "tau_omega must lie in (0, 100]");
  require(c.g_tau >= 0.0 && c.g_tau <= 1.0, "g_tau must lie in [0, 1]");
  require(c.cycles >= 1 && c.cycles <= 64, "cycles must lie in [1, 64]");
  require(c.kappa_2tau >= 0.0 && c.kappa_2tau <= 10.0, "kappa_2tau must lie in [0, 10]");
  require(c.n_th >= 0.0, "n_th must be non-negative");
  require(c.n_beta >= 0.0, "n_beta must be non-negative");
  require(c.eps_rel > 0.0 && c.eps_rel <= 1e-2, "eps_rel must lie in (0, 1e-2]");
  require(c.step_divisor == 0 || c.step_divisor >= 1000,
          "step_divisor must be 0 (automatic) or at least 1000");
  if (c.step_divisor > 0) {
    require(c.tau() / c.step_divisor <= max_step(c.tau(), c.omega) * (1.0 + 1e-12),
            "step_divisor too small: step must not exceed 0.01/omega");
  }
  require(c.fit_first >= 1 && c.fit_last > c.fit_first, "fit window must satisfy 1 <= fit_first < fit_last");
  require(c.phase_tolerance > 0.0, "phase_tolerance must be positive");
  require(c.sweep.size() <= 2, "at most two sweep axes are supported");
  for (const SweepAxis& axis : c.sweep) {
    ExperimentConfig probe = c;
    probe.sweep.clear();
    for (double v : axis.values) {
      set_config_value(probe, axis.key, format_number(v));
      if (axis.key == "cycles" && v != std::floor(v)) {
        throw ConfigError("sweep.cycles values must be integers");
      }
      validate_config(probe);
    }
  }
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "omega = " << format_number(c.omega) << '\n'
      << "tau_omega = " << format_number(c.tau_omega) << '\n'
      << "g_tau = " << format_number(c.g_tau) << '\n'
      << "cycles = " << c.cycles << '\n'
      << "kappa_2tau = " << format_number(c.kappa_2tau) << '\n'
      << "n_th = " << format_number(c.n_th) << '\n'
      << "n_beta = " << format_number(c.n_beta) << '\n'
      << "eps_rel = " << format_number(c.eps_rel) << '\n'
      << "step_divisor = " << c.step_divisor << '\n'
      << "coupling = "
      << (c.coupling == CouplingConvention::FixedPhysical ? "fixed_lambda" : "fixed_g") << '\n'
      << "fit_first = " << c.fit_first << '\n'
      << "fit_last = " << c.fit_last << '\n'
      << "phase_tolerance = " << format_number(c.phase_tolerance) << '\n'
      << "out_dir = " << c.out_dir.string() << '\n'
      << "seed = " << c.seed << '\n'
      << "dense = " << (c.dense ? "true" : "false") << '\n';
  for (const SweepAxis& axis : c.sweep) {
    out << "sweep." << axis.key << " = ";
    for (std::size_t i = 0; i < axis.values.size(); ++i) {
      out << (i ? "," : "") << format_number(axis.values[i]);
    }
    out << '\n';
  }
  return out.str();
}

int resolve_steps(const ExperimentConfig& config) {
  return config.step_divisor > 0 ? config.step_divisor
                                 : default_steps_per_half_cycle(config.tau(), config.omega);
}

}  // namespace critcycle::harness
