#include "rve/homog.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rve/errors.hpp"

namespace rve {

std::string_view to_string(ExtractionMode mode) {
  switch (mode) {
    case ExtractionMode::stress: return "stress";
    case ExtractionMode::energy: return "energy";
    case ExtractionMode::both: return "both";
  }
  return "stress";
}

// ---------------------------------------------------------------------------
// Load cases

LoadCaseRunner::LoadCaseRunner(const Mesh& mesh, const PhaseMatrices& phases, SolverOptions options)
    : mesh_(&mesh), phases_(phases), sets_(classify_boundary(mesh)), system_(assemble(mesh, phases)) {
  const ConstraintSet topology = pin_rigid_body(build_constraints(sets_, MacroStrain(mesh.dim)), sets_);
  const RecoveryMap map = make_recovery_map(topology, system_.dof_count());
  reduced_ = reduce_stiffness(system_.stiffness, map);
  try {
    solver_.emplace(reduced_, options);
  } catch (const MatrixError& e) {
    throw ConstraintError(fmt::format(
        "constraint coverage: reduced system is singular after pinning ({})", e.what()));
  }
  element_volumes_.resize(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    element_volumes_[e] = element_volume(element_coordinates(mesh, e));
  }
}

CaseResult LoadCaseRunner::run(const MacroStrain& strain) const {
  const Mesh& mesh = *mesh_;
  const ConstraintSet constraints = pin_rigid_body(build_constraints(sets_, strain), sets_);
  const RecoveryMap map = make_recovery_map(constraints, system_.dof_count());
  const std::vector<double> load = reduce_load(system_.stiffness, map);

  Solution sol;
  try {
    sol = solver_->solve(load);
  } catch (const MatrixError& e) {
    throw ConstraintError(fmt::format(
        "constraint coverage: reduced system is singular after pinning ({})", e.what()));
  }

  CaseResult out;
  out.applied = strain;
  out.displacement = recover(sol.x, map);
  out.solve = sol.report;

  const int nv = voigt_size(mesh.dim);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(nv);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const Eigen::VectorXd eps = centroid_strain(gather(mesh, e, out.displacement),
                                                element_coordinates(mesh, e));
    sum += phases_[static_cast<int>(mesh.phases[e])].values * eps * element_volumes_[e];
  }
  const double volume = mesh.volume();
  out.average_stress = sum / volume;

  const std::vector<double> ku = system_.stiffness.multiply(out.displacement);
  out.strain_energy = 0.5 * dot(out.displacement, ku);

  const double homogeneous = 0.5 * out.average_stress.dot(strain.voigt()) * volume;
  const double gap = std::abs(out.strain_energy - homogeneous);
  out.hill_residual = out.strain_energy > 0.0 ? gap / out.strain_energy : gap;

  out.surface_strain = average_strain_check(out.displacement, mesh);
  return out;
}

CaseResult run_load_case(const Mesh& mesh, const PhaseMatrices& phases, const MacroStrain& strain,
                         const SolverOptions& options) {
  const LoadCaseRunner runner(mesh, phases, options);
  return runner.run(strain);
}

Eigen::VectorXd average_stress(const Mesh& mesh, const PhaseMatrices& phases,
                               std::span<const double> displacement) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(voigt_size(mesh.dim));
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const Eigen::MatrixXd x = element_coordinates(mesh, e);
    sum += phases[static_cast<int>(mesh.phases[e])].values *
           centroid_strain(gather(mesh, e, displacement), x) * element_volume(x);
  }
  return sum / mesh.volume();
}

namespace {

// Local node cycles of the element boundary facets.
constexpr std::array<std::array<int, 4>, 6> kHexFaces{{{0, 3, 2, 1},
                                                        {4, 5, 6, 7},
                                                        {0, 1, 5, 4},
                                                        {3, 7, 6, 2},
                                                        {0, 4, 7, 3},
                                                        {1, 2, 6, 5}}};
constexpr std::array<std::array<int, 2>, 4> kQuadEdges{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};

}  // namespace

Eigen::VectorXd average_strain_check(std::span<const double> displacement, const Mesh& mesh) {
  const int dim = mesh.dim;
  const double tol = mesh.matching_tolerance();
  Point lo{};
  Point hi{};
  for (int a = 0; a < dim; ++a) {
    lo[a] = hi[a] = mesh.nodes.front()[a];
    for (const Point& p : mesh.nodes) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }

  // Which boundary plane (axis, outward sign) holds all the given nodes, if any.
  auto boundary_plane = [&](std::span<const NodeId> nodes) -> std::pair<int, int> {
    for (int a = 0; a < dim; ++a) {
      const bool on_lo = std::all_of(nodes.begin(), nodes.end(),
                                     [&](NodeId n) { return std::abs(mesh.nodes[n][a] - lo[a]) <= tol; });
      if (on_lo) return {a, -1};
      const bool on_hi = std::all_of(nodes.begin(), nodes.end(),
                                     [&](NodeId n) { return std::abs(mesh.nodes[n][a] - hi[a]) <= tol; });
      if (on_hi) return {a, 1};
    }
    return {-1, 0};
  };

  // integral[i][j] accumulates the surface integral of u_i n_j.
  Eigen::Matrix3d integral = Eigen::Matrix3d::Zero();
  const double g = 1.0 / std::sqrt(3.0);

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto elem = mesh.element(e);
    if (dim == 3) {
      for (const auto& face : kHexFaces) {
        const std::array<NodeId, 4> nodes{elem[face[0]], elem[face[1]], elem[face[2]], elem[face[3]]};
        const auto [axis, sign] = boundary_plane(nodes);
        if (axis < 0) continue;
        // Bilinear map over the facet, 2x2 Gauss.
        for (double s : {-g, g}) {
          for (double t : {-g, g}) {
            const std::array<double, 4> n{0.25 * (1 - s) * (1 - t), 0.25 * (1 + s) * (1 - t),
                                          0.25 * (1 + s) * (1 + t), 0.25 * (1 - s) * (1 + t)};
            const std::array<double, 4> ds{-0.25 * (1 - t), 0.25 * (1 - t), 0.25 * (1 + t),
                                           -0.25 * (1 + t)};
            const std::array<double, 4> dt{-0.25 * (1 - s), -0.25 * (1 + s), 0.25 * (1 + s),
                                           0.25 * (1 - s)};
            Eigen::Vector3d xs = Eigen::Vector3d::Zero();
            Eigen::Vector3d xt = Eigen::Vector3d::Zero();
            Eigen::Vector3d u = Eigen::Vector3d::Zero();
            for (int a = 0; a < 4; ++a) {
              const Point& p = mesh.nodes[nodes[a]];
              const Eigen::Vector3d x(p[0], p[1], p[2]);
              xs += ds[a] * x;
              xt += dt[a] * x;
              for (int c = 0; c < 3; ++c) u(c) += n[a] * displacement[static_cast<std::size_t>(nodes[a]) * 3 + c];
            }
            const double area = xs.cross(xt).norm();
            integral.col(axis) += sign * area * u;
          }
        }
      }
    } else {
      for (const auto& edge : kQuadEdges) {
        const std::array<NodeId, 2> nodes{elem[edge[0]], elem[edge[1]]};
        const auto [axis, sign] = boundary_plane(nodes);
        if (axis < 0) continue;
        const Point& p0 = mesh.nodes[nodes[0]];
        const Point& p1 = mesh.nodes[nodes[1]];
        const double length = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
        for (int c = 0; c < 2; ++c) {
          // Trapezoid rule is exact for the linear trace.
          const double mean = 0.5 * (displacement[static_cast<std::size_t>(nodes[0]) * 2 + c] +
                                     displacement[static_cast<std::size_t>(nodes[1]) * 2 + c]);
          integral(c, axis) += sign * length * mean;
        }
      }
    }
  }

  const Eigen::Matrix3d eps = 0.5 * (integral + integral.transpose()) / mesh.volume();
  Eigen::VectorXd v(voigt_size(dim));
  if (dim == 3) {
    v << eps(0, 0), eps(1, 1), eps(2, 2), 2 * eps(0, 1), 2 * eps(0, 2), 2 * eps(1, 2);
  } else {
    v << eps(0, 0), eps(1, 1), 2 * eps(0, 1);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Stiffness extraction

std::vector<MacroStrain> load_cases(int dim, ExtractionMode mode, double magnitude) {
  std::vector<MacroStrain> cases;
  const int nv = voigt_size(dim);
  for (int j = 0; j < nv; ++j) cases.push_back(MacroStrain::unit(dim, j, magnitude));
  if (mode == ExtractionMode::stress) return cases;
  if (dim == 3) {
    // All three normal strains active, then switch one off: k = 8 - n for n = 6, 7, 8.
    for (int n = 6; n < 9; ++n) {
      MacroStrain s(3);
      s[0] = s[1] = s[2] = magnitude;
      s[8 - n] = 0.0;
      cases.push_back(s);
    }
  } else {
    MacroStrain s(2);
    s[0] = s[1] = magnitude;
    cases.push_back(s);
  }
  return cases;
}

StressModeStiffness stiffness_stress_mode(std::span<const CaseResult> pure_cases, double magnitude) {
  if (pure_cases.empty()) throw HomogenizationError("no load cases");
  const int dim = pure_cases.front().applied.dim();
  const int nv = voigt_size(dim);
  if (static_cast<int>(pure_cases.size()) < nv) {
    throw HomogenizationError(fmt::format("stress route needs {} pure cases, got {}", nv, pure_cases.size()));
  }
  Eigen::MatrixXd c(nv, nv);
  for (int j = 0; j < nv; ++j) {
    const MacroStrain& applied = pure_cases[j].applied;
    for (int i = 0; i < nv; ++i) {
      if (applied[i] != (i == j ? magnitude : 0.0)) {
        throw HomogenizationError(fmt::format("case {} is not the pure strain {} on component {}", j,
                                              magnitude, j));
      }
    }
    c.col(j) = pure_cases[j].average_stress / magnitude;
  }
  StressModeStiffness out;
  const double scale = c.cwiseAbs().maxCoeff();
  out.asymmetry = scale > 0.0 ? (c - c.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  out.stiffness = 0.5 * (c + c.transpose());
  return out;
}

Eigen::MatrixXd stiffness_energy_mode(std::span<const CaseResult> cases, double magnitude, double volume) {
  if (cases.empty()) throw HomogenizationError("no load cases");
  const int dim = cases.front().applied.dim();
  const int nv = voigt_size(dim);
  const auto expected = load_cases(dim, ExtractionMode::energy, magnitude);
  if (cases.size() != expected.size()) {
    throw HomogenizationError(
        fmt::format("energy route needs {} cases, got {}", expected.size(), cases.size()));
  }
  for (std::size_t n = 0; n < cases.size(); ++n) {
    for (int i = 0; i < nv; ++i) {
      if (cases[n].applied[i] != expected[n][i]) {
        throw HomogenizationError(fmt::format("case {} does not match the energy-route strain state", n));
      }
    }
  }

  const double e2v = magnitude * magnitude * volume;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nv, nv);
  for (int j = 0; j < nv; ++j) {
    c(j, j) = 2.0 * cases[j].strain_energy / e2v;
    if (!(c(j, j) > 0.0)) {
      throw HomogenizationError(
          fmt::format("energy route gives non-positive C{}{} = {}", j + 1, j + 1, c(j, j)));
    }
  }
  // U/V = 1/2 C_ii e^2 + C_ij e^2 + 1/2 C_jj e^2 for the combined states.
  for (std::size_t n = static_cast<std::size_t>(nv); n < cases.size(); ++n) {
    std::array<int, 2> pair{};
    int found = 0;
    for (int i = 0; i < nv && found < 2; ++i) {
      if (cases[n].applied[i] != 0.0) pair[found++] = i;
    }
    const auto [i, j] = pair;
    const double cij = cases[n].strain_energy / e2v - 0.5 * (c(i, i) + c(j, j));
    c(i, j) = c(j, i) = cij;
  }
  return c;
}

double mode_disagreement(const Eigen::MatrixXd& stress, const Eigen::MatrixXd& energy) {
  const double scale = stress.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < stress.rows(); ++i) {
    for (Eigen::Index j = 0; j < stress.cols(); ++j) {
      const double diff = std::abs(stress(i, j) - energy(i, j));
      const double ref = energy(i, j) != 0.0 ? std::max(std::abs(stress(i, j)), std::abs(energy(i, j))) : scale;
      if (ref > 0.0) worst = std::max(worst, diff / ref);
    }
  }
  return worst;
}

std::vector<std::pair<std::string, double>> EngineeringConstants::entries() const {
  if (dim == 2) return {{"E1", E1}, {"E2", E2}, {"nu12", nu12}, {"G12", G12}};
  return {{"E1", E1},     {"E2", E2},     {"E3", E3},   {"nu12", nu12}, {"nu13", nu13},
          {"nu23", nu23}, {"G12", G12}, {"G13", G13}, {"G23", G23}};
}

EffectiveProperties compliance_and_constants(const Eigen::MatrixXd& stiffness) {
  const Eigen::Index n = stiffness.rows();
  if (stiffness.cols() != n || (n != 3 && n != 6)) {
    throw MatrixError(fmt::format("stiffness must be 3x3 or 6x6, got {}x{}", stiffness.rows(), stiffness.cols()));
  }
  const double scale = stiffness.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || (stiffness - stiffness.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw MatrixError("stiffness matrix is not symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(stiffness);
  if (llt.info() != Eigen::Success) throw MatrixError("stiffness matrix is not positive definite");

  EffectiveProperties p;
  p.dim = n == 6 ? 3 : 2;
  p.stiffness = stiffness;
  p.compliance = llt.solve(Eigen::MatrixXd::Identity(n, n));
  p.compliance = 0.5 * (p.compliance + p.compliance.transpose()).eval();

  const Eigen::MatrixXd& s = p.compliance;
  EngineeringConstants& k = p.constants;
  k.dim = p.dim;
  if (p.dim == 3) {
    k.E1 = 1.0 / s(0, 0);
    k.E2 = 1.0 / s(1, 1);
    k.E3 = 1.0 / s(2, 2);
    k.nu12 = -s(0, 1) / s(0, 0);
    k.nu13 = -s(0, 2) / s(0, 0);
    k.nu23 = -s(1, 2) / s(1, 1);
    k.G12 = 1.0 / s(3, 3);
    k.G13 = 1.0 / s(4, 4);
    k.G23 = 1.0 / s(5, 5);
  } else {
    k.E1 = 1.0 / s(0, 0);
    k.E2 = 1.0 / s(1, 1);
    k.nu12 = -s(0, 1) / s(0, 0);
    k.G12 = 1.0 / s(2, 2);
  }
  return p;
}

ModulusBounds rule_of_mixtures_bounds(const MaterialPhase& fiber, const MaterialPhase& matrix, double vf) {
  return {1.0 / (vf / fiber.young_modulus + (1.0 - vf) / matrix.young_modulus),
          vf * fiber.young_modulus + (1.0 - vf) * matrix.young_modulus};
}

ModulusBounds voigt_reuss_bounds(const PhaseMatrices& phases, double vf) {
  const Eigen::MatrixXd& cm = phases[static_cast<int>(Phase::matrix)].values;
  const Eigen::MatrixXd& cf = phases[static_cast<int>(Phase::fiber)].values;
  const Eigen::MatrixXd c_voigt = vf * cf + (1.0 - vf) * cm;
  const Eigen::MatrixXd s_reuss = vf * cf.inverse() + (1.0 - vf) * cm.inverse();
  return {1.0 / s_reuss(0, 0), 1.0 / c_voigt.inverse()(0, 0)};
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

[[noreturn]] void rethrow_for_case(std::exception_ptr error, std::size_t index, const MacroStrain& strain) {
  const std::string prefix = fmt::format("load case {} (strain {})", index + 1,
                                         std::vector<double>(strain.voigt().data(),
                                                             strain.voigt().data() + strain.size()));
  try {
    std::rethrow_exception(error);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(fmt::format("{}: {}", prefix, e.what()), e.residual_tail());
  } catch (const MatrixError& e) {
    throw MatrixError(fmt::format("{}: {}", prefix, e.what()));
  } catch (const ConstraintError& e) {
    throw ConstraintError(fmt::format("{}: {}", prefix, e.what()));
  } catch (const MeshError& e) {
    throw MeshError(fmt::format("{}: {}", prefix, e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", prefix, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", prefix, e.what()));
  }
}

std::vector<CaseResult> run_cases(const LoadCaseRunner& runner, const std::vector<MacroStrain>& strains,
                                  int threads) {
  std::vector<CaseResult> results(strains.size());
  std::vector<std::exception_ptr> errors(strains.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < strains.size(); i = next++) {
      try {
        results[i] = runner.run(strains[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(strains.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  for (std::size_t i = 0; i < strains.size(); ++i) {
    if (errors[i]) rethrow_for_case(errors[i], i, strains[i]);
  }
  return results;
}

}  // namespace

HomogenizationResult run_pipeline(const RveSpec& spec, const PipelineOptions& options) {
  spec.validate();
  HomogenizationResult out;
  out.mesh = build_mesh(spec);
  const PhaseMatrices phases = phase_matrices(spec);
  const LoadCaseRunner runner(out.mesh, phases, options.solver);

  const double eps = spec.applied_strain;
  const auto strains = load_cases(spec.dim, options.mode, eps);
  out.cases = run_cases(runner, strains, options.threads);

  Diagnostics& diag = out.diagnostics;
  diag.target_volume_fraction = spec.fiber_volume_fraction;
  diag.achieved_volume_fraction = out.mesh.achieved_volume_fraction;
  for (std::size_t n = 0; n < out.cases.size(); ++n) {
    const CaseResult& c = out.cases[n];
    diag.hill_residuals.push_back(c.hill_residual);
    diag.surface_strain_errors.push_back((c.surface_strain - c.applied.voigt()).cwiseAbs().maxCoeff());
    diag.solves.push_back(c.solve);
    if (c.hill_residual > 1e-8) {
      diag.warnings.push_back(fmt::format("load case {}: Hill residual {:.3e} exceeds 1e-8", n + 1, c.hill_residual));
    }
    if (diag.surface_strain_errors.back() > 1e-8) {
      diag.warnings.push_back(fmt::format("load case {}: surface-average strain deviates by {:.3e}", n + 1,
                                          diag.surface_strain_errors.back()));
    }
  }

  const int nv = voigt_size(spec.dim);
  const std::span<const CaseResult> pure(out.cases.data(), static_cast<std::size_t>(nv));
  auto finish = [&](const Eigen::MatrixXd& c, ExtractionMode mode) {
    EffectiveProperties p = compliance_and_constants(c);
    p.mode = mode;
    p.achieved_volume_fraction = out.mesh.achieved_volume_fraction;
    p.divisions = out.mesh.divisions;
    return p;
  };

  std::optional<Eigen::MatrixXd> stress_c;
  if (options.mode != ExtractionMode::energy) {
    const StressModeStiffness s = stiffness_stress_mode(pure, eps);
    diag.asymmetry = s.asymmetry;
    if (s.asymmetry > 1e-4) {
      diag.warnings.push_back(fmt::format(
          "stress-route stiffness asymmetry {:.3e} exceeds 1e-4; check the periodic constraints", s.asymmetry));
    }
    stress_c = s.stiffness;
    out.properties = finish(s.stiffness, ExtractionMode::stress);
  }
  if (options.mode != ExtractionMode::stress) {
    const Eigen::MatrixXd c = stiffness_energy_mode(out.cases, eps, out.mesh.volume());
    EffectiveProperties p = finish(c, ExtractionMode::energy);
    if (stress_c) {
      diag.mode_disagreement = mode_disagreement(*stress_c, c);
      out.energy_properties = std::move(p);
    } else {
      out.properties = std::move(p);
    }
  }
  return out;
}

}  // namespace rve
