#include <doctest.h>

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "critcycle/harness/config.hpp"
#include "critcycle/harness/experiment.hpp"

using namespace critcycle;
using namespace critcycle::harness;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.cycles = 3;
  c.fit_first = 1;
  c.fit_last = 3;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("parsing key = value text") {
  const ExperimentConfig c = parse_config(R"(
# a comment
tau_omega = 9     # trailing comment
g_tau=0.5
cycles = 4
kappa_2tau = 0.25
coupling = fixed_g
sweep.n_th = 0, 1, 2
)");
  CHECK(c.tau_omega == 9.0);
  CHECK(c.g_tau == 0.5);
  CHECK(c.cycles == 4);
  CHECK(c.kappa_2tau == 0.25);
  CHECK(c.coupling == CouplingConvention::FixedRescaled);
  REQUIRE(c.sweep.size() == 1);
  CHECK(c.sweep[0].key == "n_th");
  CHECK(c.sweep[0].values == std::vector<double>{0, 1, 2});
  CHECK(c.tau() == 9.0);
  CHECK(c.kappa() == doctest::Approx(0.25 / 18.0));
}

TEST_CASE("parsing is strict") {
  CHECK_THROWS_AS(parse_config("unknown_key = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("cycles = 3\ncycles = 4"), ConfigError);
  CHECK_THROWS_AS(parse_config("cycles 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("cycles = 3.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("omega = 1x"), ConfigError);
  CHECK_THROWS_AS(parse_config("omega = "), ConfigError);
  CHECK_THROWS_AS(parse_config("coupling = sideways"), ConfigError);
  CHECK_THROWS_AS(parse_config("sweep.seed = 1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("dense = maybe"), ConfigError);
  CHECK_NOTHROW(parse_config("dense = true\n\n   \n"));
}

TEST_CASE("overrides") {
  ExperimentConfig c;
  apply_override(c, "tau_omega=8.2");
  apply_override(c, " n_beta = 1.5 ");
  CHECK(c.tau_omega == 8.2);
  CHECK(c.n_beta == 1.5);
  CHECK_THROWS_AS(apply_override(c, "tau_omega"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "=1"), ConfigError);
}

TEST_CASE("range validation") {
  const auto rejects = [](const std::string& assignment) {
    ExperimentConfig c;
    apply_override(c, assignment);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  };
  CHECK_NOTHROW(validate_config(ExperimentConfig{}));
  rejects("omega=0");
  rejects("tau_omega=-1");
  rejects("g_tau=1.5");
  rejects("cycles=0");
  rejects("cycles=65");
  rejects("kappa_2tau=-0.1");
  rejects("n_th=-1");
  rejects("n_beta=-1");
  rejects("eps_rel=0.5");
  rejects("step_divisor=10");
  rejects("fit_first=0");
  rejects("fit_last=4");
  rejects("phase_tolerance=0");
  rejects("sweep.kappa_2tau=0,-1");
  rejects("sweep.cycles=2,2.5");
  ExperimentConfig three_axes;
  apply_override(three_axes, "sweep.n_th=0,1");
  apply_override(three_axes, "sweep.n_beta=0,1");
  apply_override(three_axes, "sweep.g_tau=0.5,1");
  CHECK_THROWS_AS(validate_config(three_axes), ConfigError);
}

TEST_CASE("config text round trip") {
  ExperimentConfig c;
  c.tau_omega = 0.1 + 0.2;
  c.kappa_2tau = 1.0 / 3.0;
  c.coupling = CouplingConvention::FixedRescaled;
  c.sweep = {{"n_th", {0.0, 0.5}}, {"cycles", {3, 4}}};
  const std::string text = to_config_text(c);
  const ExperimentConfig back = parse_config(text);
  CHECK(back.tau_omega == c.tau_omega);
  CHECK(back.kappa_2tau == c.kappa_2tau);
  CHECK(back.coupling == c.coupling);
  REQUIRE(back.sweep.size() == 2);
  CHECK(back.sweep[1].values == c.sweep[1].values);
  CHECK(to_config_text(back) == text);
}

TEST_CASE("format_number round trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23,
                   std::numeric_limits<double>::max(), std::nextafter(1.0, 2.0)}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(8.0) == "8");
  CHECK(format_number(0.25) == "0.25");
}

TEST_CASE("step resolution") {
  ExperimentConfig c;
  CHECK(resolve_steps(c) == 5000);
  c.step_divisor = 2000;
  CHECK(resolve_steps(c) == 2000);
}

TEST_CASE("grid expansion puts the first axis outermost") {
  ExperimentConfig c;
  CHECK(expand_grid(c).size() == 1);
  c.sweep = {{"n_th", {0.0, 1.0}}, {"tau_omega", {4.0, 6.0, 8.0}}};
  const std::vector<ExperimentConfig> grid = expand_grid(c);
  REQUIRE(grid.size() == 6);
  CHECK(grid[0].n_th == 0.0);
  CHECK(grid[0].tau_omega == 4.0);
  CHECK(grid[2].tau_omega == 8.0);
  CHECK(grid[3].n_th == 1.0);
  CHECK(grid[3].tau_omega == 4.0);
  for (const ExperimentConfig& g : grid) CHECK(g.sweep.empty());
}

TEST_CASE("grid coupling follows the ramp") {
  ExperimentConfig c;
  c.g_tau = 0.8;
  CHECK(grid_coupling(c, 0, 100) == 0.0);
  CHECK(grid_coupling(c, 50, 100) == doctest::Approx(0.4));
  CHECK(grid_coupling(c, 100, 100) == 0.8);
  CHECK(grid_coupling(c, 150, 100) == doctest::Approx(0.4));
  CHECK(grid_coupling(c, 200, 100) == 0.0);
}

TEST_CASE("run CSV layout") {
  const RunOutcome run = run_experiment(small_config());
  std::ostringstream out;
  write_run_csv(out, run);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2 + 3);
  CHECK(lines[0] == std::string("# ") + kRunCsvSchema);
  CHECK(lines[1] == "cycle,t,g,N,purity,s_mag,theta,Q_omega,I_bound,I_bound_approx");
  for (int m = 1; m <= 3; ++m) {
    const auto f = fields_of(lines[1 + m]);
    REQUIRE(f.size() == 10);
    CHECK(std::stoi(f[0]) == m);
    CHECK(std::stod(f[1]) == 16.0 * m);
    CHECK(std::stod(f[2]) == 0.0);
    CHECK(std::stod(f[3]) == run.cycles[m - 1].boson_number);
    CHECK(std::stod(f[7]) == run.snr[m - 1]);
    CHECK(std::stod(f[7]) <= std::stod(f[8]));
  }
}

TEST_CASE("dense run CSV has one row per grid point") {
  ExperimentConfig c = small_config();
  c.cycles = 1;
  c.fit_last = 1;
  c.fit_first = 1;
  c.step_divisor = 1000;
  c.dense = true;
  CHECK_THROWS_AS(validate_config(c), ConfigError);  // fit window needs two cycles
  c.cycles = 2;
  c.fit_last = 2;
  const RunOutcome run = run_experiment(c);
  std::ostringstream out;
  write_run_csv(out, run);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2 + 4 * 1000 + 1);
  const auto first = fields_of(lines[2]);
  const auto peak = fields_of(lines[2 + 1000]);
  const auto boundary = fields_of(lines[2 + 2000]);
  const auto mid = fields_of(lines[2 + 500]);
  CHECK(first[0] == "0");
  CHECK(std::stod(first[2]) == 0.0);
  CHECK(std::stod(peak[2]) == 1.0);
  CHECK(peak[0].empty());
  CHECK(boundary[0] == "1");
  CHECK(std::stod(boundary[2]) == 0.0);
  CHECK(std::stod(mid[2]) == doctest::Approx(0.5));
  CHECK(std::stod(boundary[7]) == run.snr[0]);
}

TEST_CASE("a run with no coupling stays in the vacuum") {
  ExperimentConfig c = small_config();
  c.g_tau = 0.0;
  const RunOutcome run = run_experiment(c);
  for (const CycleRecord& r : run.cycles) CHECK(r.boson_number <= 1e-12);
  for (double q : run.snr) CHECK(std::fabs(q) <= 1e-12);
  CHECK_FALSE(run.eps_flagged);
}

TEST_CASE("run summary JSON") {
  const RunOutcome run = run_experiment(small_config());
  const nlohmann::json doc = nlohmann::json::parse(run_summary_json(run));
  CHECK(doc.at("schema") == kSummarySchema);
  CHECK(doc.at("config").at("tau_omega") == 8.0);
  CHECK(doc.at("alpha").at("first") == 1);
  CHECK(doc.at("phase_match").at("matched") == true);
  CHECK(doc.at("phase_match").at("nearest_n") == 4);
  CHECK(doc.at("cycles").size() == 3);
  CHECK(doc.at("cycles")[2].at("Q_omega").get<double>() == run.snr[2]);
  CHECK(doc.at("eps_check").at("flagged") == false);
  CHECK(doc.at("warnings").is_array());
}

TEST_CASE("unresolved QFI is withheld, not reported") {
  ExperimentConfig c;
  c.cycles = 22;
  c.fit_first = 15;
  c.fit_last = 22;
  const RunOutcome run = run_experiment(c);
  CHECK(run.eps_flagged);
  CHECK_FALSE(run.qfi_resolved.back());
  CHECK_FALSE(run.alpha_exact.has_value());
  CHECK(run.alpha_bound.has_value());
  std::ostringstream out;
  write_run_csv(out, run);
  CHECK(fields_of(lines_of(out.str()).back())[7].empty());
  const nlohmann::json doc = nlohmann::json::parse(run_summary_json(run));
  CHECK(doc.at("cycles").back().at("Q_omega").is_null());
  CHECK_FALSE(doc.at("warnings").empty());
}

TEST_CASE("a single-point sweep reproduces the run") {
  const ExperimentConfig c = small_config();
  const SweepOutcome sweep = run_sweep(c, 2);
  REQUIRE(sweep.points.size() == 1);
  REQUIRE(sweep.points[0].run.has_value());
  const RunOutcome run = run_experiment(c);
  CHECK(sweep.points[0].run->snr == run.snr);
  CHECK(sweep.points[0].run->bound == run.bound);
  CHECK(sweep.all_ok());
}

TEST_CASE("sweep output is independent of the worker count") {
  ExperimentConfig c = small_config();
  c.sweep = {{"kappa_2tau", {0.0, 0.3, 1.0}}, {"n_beta", {0.0, 0.5}}};
  const auto csv = [&](int workers) {
    std::ostringstream out;
    write_sweep_csv(out, run_sweep(c, workers));
    return out.str();
  };
  const std::string serial = csv(1);
  CHECK(csv(2) == serial);
  CHECK(csv(8) == serial);
  const auto lines = lines_of(serial);
  CHECK(lines[0] == std::string("# ") + kSweepCsvSchema);
  CHECK(lines[1] ==
        "point,kappa_2tau,n_beta,status,cycle,t,N,purity,Q_omega,I_bound,alpha,alpha_bound,message");
  CHECK(lines.size() == 2 + 6 * 3);
}

TEST_CASE("failed sweep points are recorded and the rest complete") {
  ExperimentConfig c = small_config();
  c.sweep = {{"n_beta", {0.0, 1e300}}};
  const SweepOutcome sweep = run_sweep(c, 2);
  REQUIRE(sweep.points.size() == 2);
  CHECK(sweep.points[0].ok);
  CHECK_FALSE(sweep.points[1].ok);
  CHECK_FALSE(sweep.points[1].message.empty());
  CHECK_FALSE(sweep.all_ok());
  std::ostringstream out;
  write_sweep_csv(out, sweep);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2 + 3 + 1);
  const auto failed = fields_of(lines.back());
  CHECK(failed[0] == "1");
  CHECK(failed[2] == "failed");
  const nlohmann::json doc = nlohmann::json::parse(sweep_summary_json(sweep));
  CHECK(doc.at("failed") == 1);
  CHECK(doc.at("points").size() == 2);
}

}  // TEST_SUITE
