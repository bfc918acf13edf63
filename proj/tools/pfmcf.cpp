// Command-line driver: single runs, experiment sweeps, profile tables and the
// built-in property checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pfmcf/checks.hpp"
#include "pfmcf/config_io.hpp"
#include "pfmcf/experiment.hpp"
#include "pfmcf/field_io.hpp"
#include "pfmcf/observables.hpp"
#include "pfmcf/profile.hpp"
#include "pfmcf/stepper.hpp"

namespace fs = std::filesystem;
using namespace pfmcf;

namespace {

constexpr int exit_config = 2;
constexpr int exit_degenerate = 3;

int do_run(const fs::path& config, const fs::path& out) {
  const json j = read_json_file(config);
  const SimConfig cfg = sim_config_from_json(j, SimConfig{}, config.parent_path());
  cfg.validate();
  fs::create_directories(out);

  Stepper stepper(cfg);
  const auto rays = rays_for(cfg.shape);
  std::ofstream obs(out / "observations.csv");
  write_observation_header(obs, rays.size());
  const SimState final_state = stepper.run([&](const SimState& s) {
    write_observation_row(obs, measure(s.u, stepper.forcing(), cfg.eps, rays, s.time));
  });
  write_field_dump(out / "final.pfmf", final_state.u,
                   FieldMetadata{cfg.eps, cfg.dt, final_state.time, std::string(to_string(cfg.form))});

  const auto how = final_state.terminated.value_or(Termination::reached_t_end);
  std::cout << "termination: " << to_string(how) << " at t = " << format_double(final_state.time) << '\n';
  if (final_state.extinction_time) std::cout << "extinction_time: " << format_double(*final_state.extinction_time) << '\n';
  return how == Termination::degenerate ? exit_degenerate : 0;
}

int do_sweep(const fs::path& config, const std::string& preset, const fs::path& out, unsigned threads) {
  ExperimentSpec spec;
  if (!config.empty()) {
    spec = experiment_from_json(read_json_file(config), config.parent_path());
  } else {
    spec = preset_experiment(experiment_name_from_string(preset));
  }
  const ConvergenceReport report = run_experiment(spec, out, threads);
  for (const auto& c : report.cells) {
    std::cout << to_string(c.model) << " P=" << c.p << ": " << c.status;
    if (!c.message.empty()) std::cout << " (" << c.message << ')';
    std::cout << '\n';
  }
  for (const auto& s : report.slopes) {
    std::cout << "slope " << s.model << ' ' << s.quantity << ": " << format_double(s.measured) << '\n';
  }
  std::cout << "report: " << (out / "report.csv").string() << '\n';
  return has_degenerate_cell(report) ? exit_degenerate : 0;
}

int do_profiles(const fs::path& out, double half_width, std::size_t points) {
  if (points < 1001 || points % 2 == 0) throw ConfigError("points", "must be odd and at least 1001");
  if (!(half_width >= 10.0)) throw ConfigError("half_width", "must be at least 10");
  fs::create_directories(out);
  std::ofstream q(out / "q.csv"), eta(out / "eta.csv"), xi(out / "xi.csv");
  write_csv(q, q_table(half_width, points));
  write_csv(eta, solve_eta(half_width, points));
  write_csv(xi, solve_xi(half_width, points));
  std::cout << "wrote q.csv, eta.csv, xi.csv to " << out.string() << '\n';
  return 0;
}

int do_check() {
  bool all = true;
  for (const auto& r : run_property_checks()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral phase-field solver for curvature-driven interface motion"};
  app.require_subcommand(1);

  fs::path run_config, run_out = "out";
  auto* run_cmd = app.add_subcommand("run", "Run a single simulation from a SimConfig file");
  run_cmd->add_option("--config", run_config, "SimConfig JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_out, "Output directory");

  fs::path sweep_config, sweep_out = "out";
  std::string preset;
  unsigned threads = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an ExperimentSpec over its resolution sweep");
  auto* cfg_opt = sweep_cmd->add_option("--config", sweep_config, "ExperimentSpec JSON file")->check(CLI::ExistingFile);
  auto* preset_opt = sweep_cmd->add_option("--preset", preset, "Built-in experiment name");
  cfg_opt->excludes(preset_opt);
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_cmd->add_option("--threads", threads, "Cells run in parallel")->check(CLI::PositiveNumber);

  fs::path profiles_out = "profiles";
  double half_width = 20.0;
  std::size_t points = 8001;
  auto* profiles_cmd = app.add_subcommand("profiles", "Write the q, eta and xi profile tables");
  profiles_cmd->add_option("--out", profiles_out, "Output directory");
  profiles_cmd->add_option("--half-width", half_width, "Half width L of [-L, L]");
  profiles_cmd->add_option("--points", points, "Number of grid points (odd)");

  auto* check_cmd = app.add_subcommand("check", "Run the built-in property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_run(run_config, run_out);
    if (*sweep_cmd) {
      if (sweep_config.empty() && preset.empty()) {
        throw ConfigError("sweep", "either --config or --preset is required");
      }
      return do_sweep(sweep_config, preset, sweep_out, threads);
    }
    if (*profiles_cmd) return do_profiles(profiles_out, half_width, points);
    if (*check_cmd) return do_check();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: json: " << e.what() << '\n';
    return exit_config;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate: " << e.what() << '\n';
    return exit_degenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
