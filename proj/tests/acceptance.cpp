// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rve/homog.hpp"

using namespace rve;

namespace {

int g_failures = 0;

void report(bool pass, const std::string& id, const std::string& what) {
  fmt::print("{} [{}] {}\n", pass ? "PASS" : "FAIL", id, what);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double rel(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

double max_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

// Worst Hill residual and surface-strain error over every run of the suite.
struct RunLog {
  double hill = 0.0;
  double surface = 0.0;
  int cases = 0;

  void add(const HomogenizationResult& r) {
    for (double h : r.diagnostics.hill_residuals) hill = std::max(hill, h);
    for (double s : r.diagnostics.surface_strain_errors) surface = std::max(surface, s);
    cases += static_cast<int>(r.cases.size());
  }
};

RunLog g_log;

struct Timed {
  HomogenizationResult result;
  double seconds = 0.0;
};

Timed run(const RveSpec& spec, const PipelineOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed out{run_pipeline(spec, options), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g_log.add(out.result);
  return out;
}

RveSpec boron_aluminium(int divisions) {
  RveSpec spec;
  spec.dim = 3;
  spec.widths = {1.0, 1.0, 1.0};
  spec.fiber_volume_fraction = 0.47;
  spec.divisions = {divisions, divisions, divisions};
  spec.fiber_axis = 2;
  spec.fiber = {379.3, 0.1};
  spec.matrix = {68.3, 0.3};
  return spec;
}

RveSpec glass_epoxy(int divisions) {
  RveSpec spec;
  spec.dim = 2;
  spec.widths = {1.0, 1.0, 1.0};
  spec.fiber_volume_fraction = 0.5;
  spec.divisions = {divisions, divisions, 1};
  spec.fiber = {72.5, 0.22};
  spec.matrix = {2.6, 0.4};
  return spec;
}

PipelineOptions options(SolverKind kind, ExtractionMode mode = ExtractionMode::stress) {
  PipelineOptions o;
  o.mode = mode;
  o.solver.kind = kind;
  o.solver.tolerance = 1e-10;
  return o;
}

// Structure check on a z-fibre stiffness: asymmetry, zero pattern, square symmetry.
void check_structure(const HomogenizationResult& r, const std::string& id, const std::string& label) {
  const Eigen::MatrixXd& c = r.properties.stiffness;
  const double cmax = c.cwiseAbs().maxCoeff();
  double zeros = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j && !(i < 3 && j < 3)) zeros = std::max(zeros, std::abs(c(i, j)) / cmax);
  report(r.diagnostics.asymmetry <= 1e-6, id,
         fmt::format("{}: C asymmetry {:.2e} <= 1e-6", label, r.diagnostics.asymmetry));
  report(zeros <= 1e-3, id, fmt::format("{}: zero-pattern entries {:.2e} max|C| <= 1e-3", label, zeros));
  const double c11 = rel(c(1, 1), c(0, 0));
  const double c55 = rel(c(5, 5), c(4, 4));
  report(c11 <= 1e-6 && c55 <= 1e-6, id,
         fmt::format("{}: |C11-C22|/C11 {:.2e}, |C55-C66|/C55 {:.2e} <= 1e-6", label, c11, c55));
}

void reproduction(const Timed& t, const std::string& id, double transverse_tol, double shear_tol,
                  double runtime_limit) {
  const EngineeringConstants& k = t.result.properties.constants;
  const int div = t.result.properties.divisions[0];
  const std::string tag = fmt::format("{} div (vf {:.4f})", div, t.result.properties.achieved_volume_fraction);
  report(rel(k.E3, 214.5) <= 0.02, id, fmt::format("{}: fibre-axis E {:.4f} within 2% of 214.5 ({:.2f}%)", tag, k.E3,
                                                   100 * rel(k.E3, 214.5)));
  report(rel(k.E3, 213.0) <= 0.03, id, fmt::format("{}: fibre-axis E {:.4f} within 3% of 213 ({:.2f}%)", tag, k.E3,
                                                   100 * rel(k.E3, 213.0)));
  const double e_tr = 0.5 * (k.E1 + k.E2);
  report(rel(e_tr, 143.0) <= transverse_tol, id,
         fmt::format("{}: transverse E {:.4f} within {:.0f}% of 143 ({:.2f}%)", tag, e_tr, 100 * transverse_tol,
                     100 * rel(e_tr, 143.0)));
  report(rel(k.G12, 45.4) <= shear_tol, id,
         fmt::format("{}: transverse G {:.4f} within {:.0f}% of 45.4 ({:.2f}%)", tag, k.G12, 100 * shear_tol,
                     100 * rel(k.G12, 45.4)));
  const double g_ax = 0.5 * (k.G13 + k.G23);
  report(rel(g_ax, 53.8) <= shear_tol, id,
         fmt::format("{}: axial G {:.4f} within {:.0f}% of 53.8 ({:.2f}%)", tag, g_ax, 100 * shear_tol,
                     100 * rel(g_ax, 53.8)));
  report(std::abs(k.nu12 - 0.256) <= 0.04, id,
         fmt::format("{}: transverse nu {:.4f} within 0.04 of 0.256", tag, k.nu12));
  report(t.seconds <= runtime_limit, id,
         fmt::format("{}: runtime {:.1f} s <= {:.0f} s ({})", tag, t.seconds, runtime_limit,
                     to_string(t.result.diagnostics.solves.front().kind)));
}

void homogeneous(int dim, int divisions) {
  RveSpec spec = dim == 3 ? boron_aluminium(divisions) : glass_epoxy(divisions);
  spec.fiber = spec.matrix;
  const Timed t = run(spec, options(SolverKind::direct, ExtractionMode::both));
  const EngineeringConstants& k = t.result.properties.constants;
  const double E = spec.matrix.young_modulus;
  const double nu = spec.matrix.poisson_ratio;
  const double G = E / (2.0 * (1.0 + nu));
  double worst = std::max({rel(k.E1, E), rel(k.E2, E), rel(k.nu12, nu), rel(k.G12, G)});
  if (dim == 3) worst = std::max({worst, rel(k.E3, E), rel(k.nu13, nu), rel(k.nu23, nu), rel(k.G13, G), rel(k.G23, G)});
  const EngineeringConstants& ke = t.result.energy_properties->constants;
  worst = std::max({worst, rel(ke.E1, E), rel(ke.nu12, nu), rel(ke.G12, G)});

  // Periodic fluctuation: u - eps x with vertex A at the origin.
  double fluctuation = 0.0;
  const Mesh& mesh = t.result.mesh;
  for (const CaseResult& c : t.result.cases) {
    const Eigen::Matrix3d e = c.applied.tensor();
    for (std::size_t n = 0; n < mesh.node_count(); ++n)
      for (int i = 0; i < dim; ++i) {
        double affine = 0.0;
        for (int j = 0; j < dim; ++j) affine += e(i, j) * mesh.nodes[n][static_cast<std::size_t>(j)];
        fluctuation = std::max(fluctuation, std::abs(c.displacement[n * static_cast<std::size_t>(dim) + i] - affine));
      }
  }
  const double w = *std::max_element(spec.widths.begin(), spec.widths.begin() + dim);
  const std::string tag = fmt::format("{}D {} div", dim, divisions);
  report(worst <= 1e-8, "2", fmt::format("{}: constants match constituent, worst rel {:.2e} <= 1e-8", tag, worst));
  report(fluctuation <= 1e-8 * w, "2", fmt::format("{}: fluctuation {:.2e} <= 1e-8 W", tag, fluctuation));
  report(t.seconds <= 1.0, "2", fmt::format("{}: runtime {:.3f} s <= 1 s", tag, t.seconds));
}

void oracle_inversion() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 6);
  s(0, 0) = s(1, 1) = 0.006962;
  s(0, 1) = s(1, 0) = -0.001779;
  s(0, 2) = s(2, 0) = s(1, 2) = s(2, 1) = -0.000906;
  s(2, 2) = 0.004653;
  s(3, 3) = 0.021864;
  s(4, 4) = 0.018437;
  s(5, 5) = 0.018434;
  const EngineeringConstants k = compliance_and_constants(s.inverse()).constants;
  report(rel(k.E3, 214.9) <= 1e-3, "9", fmt::format("printed S: E3 {:.4f} within 0.1% of 214.9", k.E3));
  report(rel(k.E1, 143.6) <= 1e-3, "9", fmt::format("printed S: E1 {:.4f} within 0.1% of 143.6", k.E1));
  report(rel(k.G12, 45.74) <= 1e-3, "9", fmt::format("printed S: G12 {:.4f} within 0.1% of 45.74", k.G12));
  report(rel(k.nu12, 0.2555) <= 1e-3, "9", fmt::format("printed S: nu12 {:.5f} within 0.1% of 0.2555", k.nu12));
}

}  // namespace

int main() {
  try {
    // 9: arithmetic only, runs first.
    oracle_inversion();

    // 2: homogeneous exactness.
    homogeneous(3, 2);
    homogeneous(3, 5);
    homogeneous(2, 2);
    homogeneous(2, 10);

    // 5, 6, 8 on the 10-division mesh with the direct solver.
    const Timed d10 = run(boron_aluminium(10), options(SolverKind::direct, ExtractionMode::both));
    const double agree = d10.result.diagnostics.mode_disagreement.value_or(1.0);
    report(agree <= 1e-6, "5",
           fmt::format("10 div direct: energy vs stress C, {} cases, worst rel {:.2e} <= 1e-6", d10.result.cases.size(),
                       agree));
    check_structure(d10.result, "6", "10 div direct");

    const Eigen::MatrixXd& c_ref = d10.result.properties.stiffness;
    RveSpec doubled_strain = boron_aluminium(10);
    doubled_strain.applied_strain = 2e-4;
    const double d_strain = max_rel(run(doubled_strain, options(SolverKind::direct)).result.properties.stiffness, c_ref);
    report(d_strain <= 1e-10, "8", fmt::format("strain 1e-4 vs 2e-4: C rel diff {:.2e} <= 1e-10", d_strain));
    RveSpec scaled = boron_aluminium(10);
    scaled.widths = {2.0, 2.0, 2.0};
    const double d_scale = max_rel(run(scaled, options(SolverKind::direct)).result.properties.stiffness, c_ref);
    report(d_scale <= 1e-10, "8", fmt::format("W 1 vs 2: C rel diff {:.2e} <= 1e-10", d_scale));

    // 7: 2D glass/epoxy bounds and square symmetry.
    const Timed ge = run(glass_epoxy(40), options(SolverKind::direct, ExtractionMode::both));
    const EngineeringConstants& g = ge.result.properties.constants;
    report(g.E1 >= 5.02 && g.E1 <= 37.55 && g.E2 >= 5.02 && g.E2 <= 37.55, "7",
           fmt::format("2D glass/epoxy 40 div: E1 {:.4f}, E2 {:.4f} within [5.02, 37.55]", g.E1, g.E2));
    const double sq = rel(ge.result.properties.stiffness(1, 1), ge.result.properties.stiffness(0, 0));
    report(sq <= 1e-6, "7", fmt::format("2D glass/epoxy 40 div: |C11-C22|/C11 {:.2e} <= 1e-6", sq));

    // 1: reproduction, 20 divisions (looser transverse tolerance) then 40 divisions.
    const Timed d20 = run(boron_aluminium(20), options(SolverKind::cg));
    reproduction(d20, "1", 0.12, 0.12, 30.0);
    const Timed d40 = run(boron_aluminium(40), options(SolverKind::cg));
    reproduction(d40, "1", 0.08, 0.10, 300.0);
    check_structure(d40.result, "6", "40 div cg");

    const EngineeringConstants& k = d40.result.properties.constants;
    const bool in_bounds = std::min({k.E1, k.E2, k.E3}) >= 111.1 && std::max({k.E1, k.E2, k.E3}) <= 214.5;
    report(in_bounds, "7",
           fmt::format("40 div: E1 {:.3f}, E2 {:.3f}, E3 {:.3f} within [111.1, 214.5]", k.E1, k.E2, k.E3));

    // 3, 4: over every run above.
    report(g_log.hill <= 1e-8, "3",
           fmt::format("Hill residual over {} load cases: worst {:.2e} <= 1e-8", g_log.cases, g_log.hill));
    report(g_log.surface <= 1e-8, "4",
           fmt::format("surface-average strain over {} load cases: worst abs error {:.2e} <= 1e-8", g_log.cases,
                       g_log.surface));
  } catch (const std::exception& e) {
    report(false, "-", fmt::format("unexpected exception: {}", e.what()));
  }
  fmt::print("{} failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
