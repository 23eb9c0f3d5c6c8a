#include <doctest.h>

#include <cmath>

#include "rve/errors.hpp"
#include "rve/homog.hpp"

using namespace rve;

namespace {

RveSpec boron_aluminium(int divisions) {
  RveSpec spec;
  spec.divisions = {divisions, divisions, divisions};
  return spec;
}

RveSpec glass_epoxy(int divisions) {
  RveSpec spec;
  spec.dim = 2;
  spec.divisions = {divisions, divisions, 1};
  spec.fiber_volume_fraction = 0.5;
  spec.fiber = {72.5, 0.22};
  spec.matrix = {2.6, 0.4};
  return spec;
}

PipelineOptions direct(ExtractionMode mode = ExtractionMode::stress) {
  PipelineOptions o;
  o.mode = mode;
  o.solver.kind = SolverKind::direct;
  return o;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("load case list") {
  const auto stress3 = load_cases(3, ExtractionMode::stress, 1e-4);
  CHECK(stress3.size() == 6);
  CHECK(stress3[4][4] == 1e-4);
  const auto energy3 = load_cases(3, ExtractionMode::energy, 1e-4);
  REQUIRE(energy3.size() == 9);
  CHECK(energy3[6].voigt().isApprox(Eigen::Vector<double, 6>(1e-4, 1e-4, 0, 0, 0, 0)));
  CHECK(energy3[7].voigt().isApprox(Eigen::Vector<double, 6>(1e-4, 0, 1e-4, 0, 0, 0)));
  CHECK(energy3[8].voigt().isApprox(Eigen::Vector<double, 6>(0, 1e-4, 1e-4, 0, 0, 0)));
  const auto energy2 = load_cases(2, ExtractionMode::both, 2e-4);
  REQUIRE(energy2.size() == 4);
  CHECK(energy2[3].voigt().isApprox(Eigen::Vector3d(2e-4, 2e-4, 0)));
}

TEST_CASE("zero macro strain gives a zero field") {
  const RveSpec spec = boron_aluminium(4);
  const Mesh mesh = build_mesh(spec);
  const CaseResult r = run_load_case(mesh, phase_matrices(spec), MacroStrain(3));
  for (double u : r.displacement) CHECK(u == 0.0);
  CHECK(r.average_stress.isZero(0.0));
  CHECK(r.strain_energy == 0.0);
  CHECK(r.hill_residual == 0.0);
}

TEST_CASE("homogeneous material is reproduced exactly") {
  RveSpec spec = boron_aluminium(3);
  spec.fiber = spec.matrix;
  const PhaseMatrices phases = phase_matrices(spec);
  const Mesh mesh = build_mesh(spec);

  const MacroStrain e(3, std::vector<double>{1e-4, -2e-4, 5e-5, 3e-4, -1e-4, 2e-4});
  const CaseResult r = run_load_case(mesh, phases, e, {SolverKind::direct});
  const Eigen::VectorXd expected = phases[0].values * e.voigt();
  CHECK((r.average_stress - expected).cwiseAbs().maxCoeff() < 1e-12 * expected.cwiseAbs().maxCoeff());
  // No periodic fluctuation: u = eps x with vertex A at the origin.
  const Eigen::Matrix3d t = e.tensor();
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    const Eigen::Vector3d x(mesh.nodes[n][0], mesh.nodes[n][1], mesh.nodes[n][2]);
    const Eigen::Vector3d affine = t * x;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.displacement[n * 3 + i] - affine(i)) <= 1e-8 * 1.0e-4);
  }

  const HomogenizationResult h = run_pipeline(spec, direct(ExtractionMode::both));
  const EngineeringConstants& c = h.properties.constants;
  for (double E : {c.E1, c.E2, c.E3}) CHECK(E == doctest::Approx(68.3).epsilon(1e-10));
  for (double nu : {c.nu12, c.nu13, c.nu23}) CHECK(nu == doctest::Approx(0.3).epsilon(1e-10));
  for (double G : {c.G12, c.G13, c.G23}) CHECK(G == doctest::Approx(68.3 / 2.6).epsilon(1e-10));
  REQUIRE(h.energy_properties);
  const Eigen::MatrixXd& ce = h.energy_properties->stiffness;
  CHECK(ce(0, 1) == doctest::Approx(39.40384615384615).epsilon(1e-10));
  CHECK(ce(0, 0) == doctest::Approx(91.94230769230769).epsilon(1e-10));
  CHECK(ce(3, 3) == doctest::Approx(26.26923076923077).epsilon(1e-10));
}

TEST_CASE("average stress is linear in the macro strain") {
  const RveSpec spec = boron_aluminium(4);
  const Mesh mesh = build_mesh(spec);
  const LoadCaseRunner runner(mesh, phase_matrices(spec), {SolverKind::direct});
  const MacroStrain a(3, std::vector<double>{1e-4, 0, 0, 0, 2e-4, 0});
  const MacroStrain b(3, std::vector<double>{0, -1e-4, 3e-4, 1e-4, 0, 0});
  const Eigen::VectorXd sa = runner.run(a).average_stress;
  const Eigen::VectorXd sb = runner.run(b).average_stress;
  const Eigen::VectorXd sab = runner.run(a + b).average_stress;
  CHECK((sab - sa - sb).cwiseAbs().maxCoeff() < 1e-10 * sab.cwiseAbs().maxCoeff());
}

TEST_CASE("Hill condition and surface strain check on a composite cell") {
  for (const RveSpec& spec : {boron_aluminium(6), glass_epoxy(12)}) {
    const HomogenizationResult h = run_pipeline(spec, direct(ExtractionMode::both));
    for (double r : h.diagnostics.hill_residuals) CHECK(r <= 1e-8);
    for (double r : h.diagnostics.surface_strain_errors) CHECK(r <= 1e-8);
    for (const CaseResult& c : h.cases) {
      CHECK(c.strain_energy > 0.0);
      CHECK((c.surface_strain - c.applied.voigt()).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK(h.diagnostics.warnings.empty());
    REQUIRE(h.diagnostics.mode_disagreement);
    CHECK(*h.diagnostics.mode_disagreement <= 1e-6);
  }
}

TEST_CASE("effective stiffness structure") {
  const HomogenizationResult h = run_pipeline(boron_aluminium(6), direct());
  const Eigen::MatrixXd& c = h.properties.stiffness;
  const double cmax = c.cwiseAbs().maxCoeff();
  CHECK(h.diagnostics.asymmetry <= 1e-6);
  CHECK(c(0, 0) == doctest::Approx(c(1, 1)).epsilon(1e-6));
  CHECK(c(4, 4) == doctest::Approx(c(5, 5)).epsilon(1e-6));
  CHECK(c(0, 2) == doctest::Approx(c(1, 2)).epsilon(1e-6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const bool normal = i < 3 && j < 3;
      if (!normal && i != j) CHECK(std::abs(c(i, j)) <= 1e-3 * cmax);
    }
  const EngineeringConstants& k = h.properties.constants;
  CHECK(k.E1 == doctest::Approx(k.E2).epsilon(1e-6));
  CHECK(k.G13 == doctest::Approx(k.G23).epsilon(1e-6));
  CHECK(k.E3 > k.E1);
  // C S = I.
  const Eigen::MatrixXd cs = c * h.properties.compliance;
  CHECK((cs - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("results are invariant under strain magnitude and cell scaling") {
  RveSpec base = boron_aluminium(5);
  const Eigen::MatrixXd c0 = run_pipeline(base, direct()).properties.stiffness;
  RveSpec larger_strain = base;
  larger_strain.applied_strain = 2e-4;
  CHECK(rel_diff(run_pipeline(larger_strain, direct()).properties.stiffness, c0) < 1e-10);
  RveSpec scaled = base;
  scaled.widths = {2.0, 2.0, 2.0};
  CHECK(rel_diff(run_pipeline(scaled, direct()).properties.stiffness, c0) < 1e-10);
  // The fibre direction follows fiber_axis.
  RveSpec along_x = base;
  along_x.fiber_axis = 0;
  const EngineeringConstants kx = run_pipeline(along_x, direct()).properties.constants;
  const EngineeringConstants kz = run_pipeline(base, direct()).properties.constants;
  CHECK(kx.E1 == doctest::Approx(kz.E3).epsilon(1e-10));
  CHECK(kx.E3 == doctest::Approx(kz.E1).epsilon(1e-10));
}

TEST_CASE("iterative and direct solvers agree") {
  const RveSpec spec = boron_aluminium(5);
  PipelineOptions cg;
  cg.solver.kind = SolverKind::cg;
  cg.threads = 2;
  const Eigen::MatrixXd a = run_pipeline(spec, cg).properties.stiffness;
  const Eigen::MatrixXd b = run_pipeline(spec, direct()).properties.stiffness;
  CHECK(rel_diff(a, b) < 1e-8);
  // Threaded execution does not change the numbers.
  PipelineOptions serial = cg;
  serial.threads = 1;
  CHECK(run_pipeline(spec, serial).properties.stiffness == a);
}

TEST_CASE("moduli lie within the phase bounds") {
  for (const RveSpec& spec : {boron_aluminium(8), glass_epoxy(16)}) {
    const HomogenizationResult h = run_pipeline(spec, direct());
    const ModulusBounds b = voigt_reuss_bounds(phase_matrices(spec), h.properties.achieved_volume_fraction);
    const EngineeringConstants& k = h.properties.constants;
    std::vector<double> moduli{k.E1, k.E2};
    if (spec.dim == 3) moduli.push_back(k.E3);
    for (double E : moduli) {
      CHECK(E >= b.reuss);
      CHECK(E <= b.voigt);
    }
  }
}

TEST_CASE("bound formulas") {
  const ModulusBounds rom = rule_of_mixtures_bounds({379.3, 0.1}, {68.3, 0.3}, 0.47);
  CHECK(rom.voigt == doctest::Approx(214.47).epsilon(1e-12));
  CHECK(rom.reuss == doctest::Approx(1.0 / (0.47 / 379.3 + 0.53 / 68.3)).epsilon(1e-12));
  CHECK(rom.reuss == doctest::Approx(111.1).epsilon(1e-3));
  const ModulusBounds flat = rule_of_mixtures_bounds({72.5, 0.22}, {2.6, 0.4}, 0.5);
  CHECK(flat.voigt == doctest::Approx(37.55));
  CHECK(flat.reuss == doctest::Approx(5.02).epsilon(1e-3));

  // Equal Poisson ratios collapse the rigorous bounds onto the rule of mixtures.
  RveSpec same_nu = boron_aluminium(2);
  same_nu.fiber.poisson_ratio = 0.3;
  const ModulusBounds rig = voigt_reuss_bounds(phase_matrices(same_nu), 0.47);
  const ModulusBounds ref = rule_of_mixtures_bounds(same_nu.fiber, same_nu.matrix, 0.47);
  CHECK(rig.voigt == doctest::Approx(ref.voigt).epsilon(1e-12));
  CHECK(rig.reuss == doctest::Approx(ref.reuss).epsilon(1e-12));
  const ModulusBounds wide = voigt_reuss_bounds(phase_matrices(boron_aluminium(2)), 0.47);
  CHECK(wide.voigt > rom.voigt);
}

TEST_CASE("compliance inversion of a printed orthotropic matrix") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 6);
  s(0, 0) = s(1, 1) = 0.006962;
  s(0, 1) = s(1, 0) = -0.001779;
  s(0, 2) = s(2, 0) = s(1, 2) = s(2, 1) = -0.000906;
  s(2, 2) = 0.004653;
  s(3, 3) = 0.021864;
  s(4, 4) = 0.018437;
  s(5, 5) = 0.018434;
  const EffectiveProperties p = compliance_and_constants(s.inverse());
  CHECK(p.constants.E3 == doctest::Approx(214.9).epsilon(1e-3));
  CHECK(p.constants.E1 == doctest::Approx(143.6).epsilon(1e-3));
  CHECK(p.constants.G12 == doctest::Approx(45.74).epsilon(1e-3));
  CHECK(p.constants.nu12 == doctest::Approx(0.2555).epsilon(1e-3));
  CHECK((p.compliance - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compliance inversion rejects invalid stiffness") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(3, 3);
  c(0, 1) = 0.5;
  CHECK_THROWS_AS(compliance_and_constants(c), MatrixError);
  Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  CHECK_THROWS_AS(compliance_and_constants(indefinite), MatrixError);
}

TEST_CASE("2D constants") {
  const HomogenizationResult h = run_pipeline(glass_epoxy(10), direct());
  const EngineeringConstants& k = h.properties.constants;
  CHECK(h.properties.stiffness.rows() == 3);
  CHECK(k.E1 == doctest::Approx(k.E2).epsilon(1e-6));
  CHECK(k.entries().size() == 4);
  CHECK(k.entries()[0].first == "E1");
  CHECK(k.entries()[3].first == "G12");

  RveSpec homogeneous = glass_epoxy(4);
  homogeneous.fiber = homogeneous.matrix;
  const EngineeringConstants m = run_pipeline(homogeneous, direct(ExtractionMode::energy)).properties.constants;
  CHECK(m.E1 == doctest::Approx(2.6).epsilon(1e-10));
  CHECK(m.nu12 == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(m.G12 == doctest::Approx(2.6 / 2.8).epsilon(1e-10));
}

TEST_CASE("mode disagreement metric") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3) * 10.0;
  Eigen::MatrixXd b = a;
  CHECK(mode_disagreement(a, b) == 0.0);
  b(0, 0) = 10.1;
  CHECK(mode_disagreement(a, b) == doctest::Approx(0.1 / 10.1).epsilon(1e-6));
  a(0, 0) = 10.0;
  b(0, 0) = 10.0;
  a(0, 2) = 0.01;  // structural zero in the energy estimate
  CHECK(mode_disagreement(a, b) == doctest::Approx(1e-3));
}
