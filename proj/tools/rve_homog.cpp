// rve-homog: effective elastic properties of a periodic fibre/matrix cell.
//
//   rve-homog run --config cell.cfg [--mode stress|energy|both] [--divisions N]
//                 [--export-vtk DIR] [--output PATH] [--format json|csv]
//                 [--solver cg|direct] [--set key=value]... [-v]
//   rve-homog keys
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 numerical error.
// RVE_HOMOG_THREADS sets the number of load cases solved concurrently.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rve/config.hpp"
#include "rve/errors.hpp"
#include "rve/homog.hpp"
#include "rve/report.hpp"
#include "rve/vtk.hpp"

namespace {

int thread_count_from_env() {
  const char* env = std::getenv("RVE_HOMOG_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const int n = std::stoi(env);
    if (n < 1) throw std::invalid_argument("non-positive");
    return n;
  } catch (const std::exception&) {
    throw rve::ConfigError(fmt::format("RVE_HOMOG_THREADS must be a positive integer, got '{}'", env));
  }
}

struct RunFlags {
  std::string config;
  std::string mode;
  std::string divisions;
  std::string vtk_dir;
  std::string output;
  std::string format;
  std::string solver;
  std::vector<std::string> assignments;
  int verbose = 0;
};

int run(const RunFlags& flags) {
  rve::KeyValues values;
  if (!flags.config.empty()) values = rve::read_key_values(std::filesystem::path(flags.config));
  for (const auto& text : flags.assignments) {
    const auto [key, value] = rve::split_assignment(text);
    values[key] = value;
  }
  if (!flags.mode.empty()) values["analysis.mode"] = flags.mode;
  if (!flags.divisions.empty()) values["mesh.divisions"] = flags.divisions;
  if (!flags.vtk_dir.empty()) values["output.vtk_dir"] = flags.vtk_dir;
  if (!flags.output.empty()) values["output.path"] = flags.output;
  if (!flags.format.empty()) values["output.format"] = flags.format;
  if (!flags.solver.empty()) values["solver.kind"] = flags.solver;
  if (flags.verbose > 0) values["output.verbosity"] = std::to_string(flags.verbose);

  rve::RunConfig cfg = rve::parse_config(values);
  cfg.pipeline.threads = thread_count_from_env();

  if (cfg.verbosity > 0) {
    const auto& s = cfg.spec;
    fmt::print(std::cerr, "rve-homog: {}D cell, vf {}, divisions {} {} {}, mode {}, solver {}\n", s.dim,
               s.fiber_volume_fraction, s.divisions[0], s.divisions[1], s.dim == 3 ? s.divisions[2] : 0,
               rve::to_string(cfg.pipeline.mode), rve::to_string(cfg.pipeline.solver.kind));
  }

  const rve::HomogenizationResult result = rve::run_pipeline(cfg.spec, cfg.pipeline);

  if (cfg.verbosity > 0) {
    for (std::size_t i = 0; i < result.diagnostics.solves.size(); ++i) {
      const auto& r = result.diagnostics.solves[i];
      fmt::print(std::cerr, "  case {}: {} iterations, residual {:.3e}, {:.2f} s, {} unknowns\n", i + 1,
                 r.iterations, r.relative_residual, r.wall_seconds, r.size);
    }
  }
  for (const auto& w : result.diagnostics.warnings) fmt::print(std::cerr, "warning: {}\n", w);

  rve::write_text(rve::emit_results(result, cfg.format, cfg.pipeline.solver), cfg.output_path);

  if (cfg.vtk_dir) {
    const auto paths =
        rve::export_fields(result.mesh, rve::phase_matrices(cfg.spec), result.cases, *cfg.vtk_dir);
    if (cfg.verbosity > 0) fmt::print(std::cerr, "wrote {} VTK files to {}\n", paths.size(), *cfg.vtk_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective elastic properties of periodic fibre-reinforced unit cells"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Homogenise one unit cell");
  run_cmd->add_option("--config", flags.config, "key = value configuration file");
  run_cmd->add_option("--mode", flags.mode, "stress|energy|both");
  run_cmd->add_option("--divisions", flags.divisions, "elements per edge (overrides mesh.divisions)");
  run_cmd->add_option("--export-vtk", flags.vtk_dir, "write one VTK file per load case into DIR");
  run_cmd->add_option("--output", flags.output, "result file, '-' for stdout");
  run_cmd->add_option("--format", flags.format, "json|csv");
  run_cmd->add_option("--solver", flags.solver, "cg|direct");
  run_cmd->add_option("--set", flags.assignments, "override any configuration key: key=value");
  run_cmd->add_flag("-v,--verbose", flags.verbose, "progress and solver statistics on stderr");

  CLI::App* keys_cmd = app.add_subcommand("keys", "List configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (keys_cmd->parsed()) {
    for (const auto& [key, help] : rve::config_keys()) fmt::print("{:<24} {}\n", key, help);
    return 0;
  }

  try {
    return run(flags);
  } catch (const rve::ConfigError& e) {
    fmt::print(std::cerr, "configuration error: {}\n", e.what());
    return 1;
  } catch (const rve::IoError& e) {
    fmt::print(std::cerr, "I/O error: {}\n", e.what());
    return 1;
  } catch (const rve::Error& e) {
    fmt::print(std::cerr, "numerical error: {}\n", e.what());
    return 2;
  }
}
