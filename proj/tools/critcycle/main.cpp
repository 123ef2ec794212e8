// critcycle: run, sweep and validate critical-cycle sensing experiments.
//
// Exit codes: 0 success, 1 validation check failed, 2 configuration error,
// 3 numerical failure, 4 sweep finished with failed points.

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "critcycle/errors.hpp"
#include "critcycle/harness/config.hpp"
#include "critcycle/harness/experiment.hpp"
#include "critcycle/harness/validation.hpp"

namespace {

using namespace critcycle;
using namespace critcycle::harness;

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3, kSweepPartial = 4 };

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers{0};
  bool dense{false};
  std::string level{"fast"};
};

int default_workers() {
  if (const char* env = std::getenv("CRITCYCLE_WORKERS"); env != nullptr && *env != '\0') {
    const std::string_view text(env);
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || value < 1) {
      throw ConfigError("CRITCYCLE_WORKERS must be a positive integer, got '" + std::string(text) + "'");
    }
    return value;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

ExperimentConfig build_config(const Options& opt) {
  ExperimentConfig config;
  if (!opt.config_path.empty()) config = load_config_file(opt.config_path);
  for (const std::string& assignment : opt.overrides) apply_override(config, assignment);
  if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
  if (opt.dense) config.dense = true;
  validate_config(config);
  return config;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
  return config.out_dir;
}

int cmd_run(const Options& opt) {
  const ExperimentConfig config = build_config(opt);
  const auto dir = prepare_out_dir(config);
  const RunOutcome run = run_experiment(config);
  std::ostringstream csv;
  write_run_csv(csv, run);
  write_file(dir / "run.csv", csv.str());
  write_file(dir / "summary.json", run_summary_json(run));
  for (const std::string& w : run.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << (dir / "run.csv").string() << " and " << (dir / "summary.json").string();
  if (run.alpha_exact) std::cout << " (alpha = " << format_number(run.alpha_exact->alpha) << ')';
  std::cout << '\n';
  return kOk;
}

int cmd_sweep(const Options& opt) {
  const ExperimentConfig config = build_config(opt);
  const int workers = opt.workers > 0 ? opt.workers : default_workers();
  const auto dir = prepare_out_dir(config);
  const SweepOutcome sweep = run_sweep(config, workers);
  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  write_file(dir / "sweep.csv", csv.str());
  write_file(dir / "sweep_summary.json", sweep_summary_json(sweep));
  std::size_t failed = 0;
  for (const SweepPoint& p : sweep.points) {
    if (!p.ok) {
      ++failed;
      std::cerr << "point " << p.index << " failed: " << p.message << '\n';
    }
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << sweep.points.size()
            << " points, " << failed << " failed)\n";
  return failed == 0 ? kOk : kSweepPartial;
}

int cmd_validate(const Options& opt) {
  ValidationLevel level;
  if (opt.level == "fast") {
    level = ValidationLevel::Fast;
  } else if (opt.level == "full") {
    level = ValidationLevel::Full;
  } else {
    throw ConfigError("validation level must be fast or full");
  }
  const ExperimentConfig config = build_config(opt);
  const int workers = opt.workers > 0 ? opt.workers : default_workers();
  const auto dir = prepare_out_dir(config);
  const std::vector<CheckResult> checks = run_validation(config, level, workers);
  bool all = true;
  for (const CheckResult& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << " ["
              << format_number(std::round(c.seconds * 1000.0) / 1000.0) << " s]\n";
    all = all && c.passed;
  }
  write_file(dir / "validation.json", validation_report_json(checks, level));
  return all ? kOk : kCheckFailed;
}

int cmd_print_config(const Options& opt) {
  std::cout << to_config_text(build_config(opt));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-cycle quantum sensing simulator"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", opt.overrides, "override a config key (key=value); repeatable")
        ->allow_extra_args(false);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (default: CRITCYCLE_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--dense", opt.dense, "emit every integration step, not just cycle boundaries");
  };

  CLI::App* run = app.add_subcommand("run", "integrate one configuration");
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate the sweep grid in parallel");
  CLI::App* validate = app.add_subcommand("validate", "run the invariant and oracle checks");
  CLI::App* print = app.add_subcommand("print-config", "print the resolved configuration");
  for (CLI::App* sub : {run, sweep, validate, print}) add_common(sub);
  validate->add_option("level", opt.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*validate) return cmd_validate(opt);
    return cmd_print_config(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}
