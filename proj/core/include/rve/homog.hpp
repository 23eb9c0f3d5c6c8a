#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rve/fem.hpp"
#include "rve/mesh.hpp"
#include "rve/pbc.hpp"
#include "rve/solver.hpp"

namespace rve {

enum class ExtractionMode { stress, energy, both };

std::string_view to_string(ExtractionMode mode);

/// One solved macroscopic strain state.
struct CaseResult {
  MacroStrain applied{3};
  std::vector<double> displacement;
  Eigen::VectorXd average_stress;   ///< volume average, Voigt, GPa
  double strain_energy = 0.0;       ///< 1/2 u^T K u, GPa mm^3
  double hill_residual = 0.0;       ///< |U* - 1/2 sigma.eps V| / U*
  Eigen::VectorXd surface_strain;   ///< boundary-integral average strain, Voigt
  SolveReport solve;
};

/// Mesh, assembled stiffness and reduced operator shared by all load cases.
///
/// The constraint topology does not depend on the applied strain, so the
/// reduced stiffness (and its factorisation, for the direct solver) is built
/// once. `run` is const and safe to call from several threads.
class LoadCaseRunner {
 public:
  LoadCaseRunner(const Mesh& mesh, const PhaseMatrices& phases, SolverOptions options);

  CaseResult run(const MacroStrain& strain) const;

  const Mesh& mesh() const noexcept { return *mesh_; }
  const NodeSets& node_sets() const noexcept { return sets_; }
  const GlobalSystem& system() const noexcept { return system_; }
  const CsrMatrix& reduced_stiffness() const noexcept { return reduced_; }
  const PhaseMatrices& phases() const noexcept { return phases_; }

 private:
  const Mesh* mesh_;
  PhaseMatrices phases_;
  NodeSets sets_;
  GlobalSystem system_;
  CsrMatrix reduced_;
  std::optional<SpdSolver> solver_;
  std::vector<double> element_volumes_;
};

CaseResult run_load_case(const Mesh& mesh, const PhaseMatrices& phases, const MacroStrain& strain,
                         const SolverOptions& options = {});

/// Volume-averaged stress from centroid stresses weighted by element volume.
Eigen::VectorXd average_stress(const Mesh& mesh, const PhaseMatrices& phases,
                               std::span<const double> displacement);

/// Average strain from boundary displacements,
/// eps_ij = 1/V * surface integral of 1/2 (u_i n_j + u_j n_i). Voigt with engineering shear.
Eigen::VectorXd average_strain_check(std::span<const double> displacement, const Mesh& mesh);

/// Pure unit-strain states, then (energy route only) the combined states:
/// 3D (e, e, 0), (e, 0, e), (0, e, e); 2D (e, e).
std::vector<MacroStrain> load_cases(int dim, ExtractionMode mode, double magnitude);

struct StressModeStiffness {
  Eigen::MatrixXd stiffness;  ///< symmetrised
  double asymmetry = 0.0;     ///< max |C - C^T| / max |C| before symmetrisation
};

/// Column j of C is the average stress of pure case j divided by the strain magnitude.
StressModeStiffness stiffness_stress_mode(std::span<const CaseResult> pure_cases, double magnitude);

/// C from strain energies: diagonals 2U/(V e^2), normal-normal couplings from
/// the combined cases. Other entries are zero. Cases ordered as `load_cases`.
Eigen::MatrixXd stiffness_energy_mode(std::span<const CaseResult> cases, double magnitude,
                                      double volume);

/// Largest entrywise disagreement between two stiffness estimates. Entries
/// that are non-zero in either matrix are compared relative to their own
/// magnitude; entries zero in `energy` relative to max |stress|.
double mode_disagreement(const Eigen::MatrixXd& stress, const Eigen::MatrixXd& energy);

struct EngineeringConstants {
  int dim = 3;
  double E1 = 0, E2 = 0, E3 = 0;
  double nu12 = 0, nu13 = 0, nu23 = 0;
  double G12 = 0, G13 = 0, G23 = 0;

  /// Named values: E1, E2, E3, nu12, nu13, nu23, G12, G13, G23 in 3D; E1, E2, nu12, G12 in 2D.
  std::vector<std::pair<std::string, double>> entries() const;
};

struct EffectiveProperties {
  int dim = 3;
  ExtractionMode mode = ExtractionMode::stress;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd compliance;
  EngineeringConstants constants;
  double achieved_volume_fraction = 0.0;
  std::array<int, 3> divisions{};
};

/// S = C^-1 and the engineering constants (3D: E_i = 1/S_ii, nu_12 = -S12/S11,
/// nu_13 = -S13/S11, nu_23 = -S23/S22, G12 = 1/S44, G13 = 1/S55, G23 = 1/S66;
/// 2D: E1, E2, nu12 = -S12/S11, G12 = 1/S33). Throws MatrixError unless C is
/// symmetric positive definite.
EffectiveProperties compliance_and_constants(const Eigen::MatrixXd& stiffness);

struct PipelineOptions {
  ExtractionMode mode = ExtractionMode::stress;
  SolverOptions solver;
  int threads = 1;
};

struct Diagnostics {
  std::vector<double> hill_residuals;
  std::vector<double> surface_strain_errors;  ///< max |surface strain - applied| per case
  double asymmetry = 0.0;
  std::optional<double> mode_disagreement;
  double target_volume_fraction = 0.0;
  double achieved_volume_fraction = 0.0;
  std::vector<SolveReport> solves;
  std::vector<std::string> warnings;
};

struct HomogenizationResult {
  EffectiveProperties properties;  ///< stress route unless mode == energy
  std::optional<EffectiveProperties> energy_properties;  ///< mode == both
  Diagnostics diagnostics;
  Mesh mesh;
  std::vector<CaseResult> cases;
};

HomogenizationResult run_pipeline(const RveSpec& spec, const PipelineOptions& options = {});

/// Bounds on a Young's modulus from uniform-strain (upper) and uniform-stress
/// (lower) mixing of the two phases at volume fraction `vf`.
struct ModulusBounds {
  double reuss = 0.0;
  double voigt = 0.0;
};

/// Rule-of-mixtures forms: vf Ef + (1 - vf) Em and 1 / (vf / Ef + (1 - vf) / Em).
ModulusBounds rule_of_mixtures_bounds(const MaterialPhase& fiber, const MaterialPhase& matrix,
                                      double vf);

/// Rigorous bounds for any normal direction: 1/S_ii of the volume-averaged
/// stiffness (upper) and of the volume-averaged compliance (lower). The upper
/// value exceeds the rule of mixtures when the Poisson ratios differ.
ModulusBounds voigt_reuss_bounds(const PhaseMatrices& phases, double vf);

}  // namespace rve
