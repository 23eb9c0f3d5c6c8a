#include "rve/report.hpp"

#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <json.hpp>

namespace rve {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json properties_json(const EffectiveProperties& p) {
  ordered_json j;
  j["mode"] = std::string(to_string(p.mode));
  j["stiffness"] = matrix_json(p.stiffness);
  j["compliance"] = matrix_json(p.compliance);
  ordered_json constants = ordered_json::object();
  for (const auto& [name, value] : p.constants.entries()) constants[name] = value;
  j["constants"] = std::move(constants);
  return j;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::vector<std::string> voigt_labels(int dim) {
  if (dim == 3) return {"11", "22", "33", "12", "13", "23"};
  return {"11", "22", "12"};
}

std::string format_json(const HomogenizationResult& result, const SolverOptions& solver) {
  const EffectiveProperties& p = result.properties;
  const Diagnostics& d = result.diagnostics;

  ordered_json doc;
  doc["dim"] = p.dim;
  doc["voigt_order"] = voigt_labels(p.dim);
  const ordered_json primary = properties_json(p);
  for (const auto& [key, value] : primary.items()) doc[key] = value;
  if (result.energy_properties) doc["energy_mode"] = properties_json(*result.energy_properties);

  ordered_json diag;
  diag["hill_residuals"] = d.hill_residuals;
  diag["surface_strain_errors"] = d.surface_strain_errors;
  diag["asymmetry"] = d.asymmetry;
  if (d.mode_disagreement) diag["mode_disagreement"] = *d.mode_disagreement;
  diag["target_vf"] = d.target_volume_fraction;
  diag["achieved_vf"] = d.achieved_volume_fraction;
  diag["divisions"] = std::vector<int>(p.divisions.begin(), p.divisions.begin() + p.dim);

  ordered_json solves = ordered_json::array();
  for (const SolveReport& r : d.solves) {
    ordered_json s;
    s["iterations"] = r.iterations;
    s["relative_residual"] = r.relative_residual;
    s["size"] = r.size;
    solves.push_back(std::move(s));
  }
  ordered_json solver_json;
  solver_json["kind"] = std::string(to_string(solver.kind));
  solver_json["tolerance"] = solver.tolerance;
  solver_json["cases"] = std::move(solves);
  diag["solver"] = std::move(solver_json);
  diag["warnings"] = d.warnings;
  doc["diagnostics"] = std::move(diag);
  return doc.dump(2) + "\n";
}

std::string format_csv(const HomogenizationResult& result) {
  const EffectiveProperties& p = result.properties;
  const Diagnostics& d = result.diagnostics;
  std::string out = "key,value\n";
  auto row = [&](const std::string& key, double v) { out += fmt::format("{},{}\n", key, g17(v)); };

  out += fmt::format("dim,{}\nmode,{}\n", p.dim, to_string(p.mode));
  for (const auto& [name, value] : p.constants.entries()) row(name, value);
  for (Eigen::Index i = 0; i < p.stiffness.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.stiffness.cols(); ++j) row(fmt::format("C{}{}", i + 1, j + 1), p.stiffness(i, j));
  }
  for (Eigen::Index i = 0; i < p.compliance.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.compliance.cols(); ++j) row(fmt::format("S{}{}", i + 1, j + 1), p.compliance(i, j));
  }
  row("target_vf", d.target_volume_fraction);
  row("achieved_vf", d.achieved_volume_fraction);
  row("asymmetry", d.asymmetry);
  double hill = 0.0;
  for (double h : d.hill_residuals) hill = std::max(hill, h);
  row("max_hill_residual", hill);
  double surface = 0.0;
  for (double s : d.surface_strain_errors) surface = std::max(surface, s);
  row("max_surface_strain_error", surface);
  if (d.mode_disagreement) row("mode_disagreement", *d.mode_disagreement);
  return out;
}

std::string emit_results(const HomogenizationResult& result, OutputFormat format, const SolverOptions& solver) {
  return format == OutputFormat::json ? format_json(result, solver) : format_csv(result);
}

void write_text(const std::string& text, const std::string& path) {
  if (path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw IoError("failed to write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path));
}

}  // namespace rve
