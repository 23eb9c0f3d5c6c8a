#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "rve/mesh.hpp"
#include "rve/sparse.hpp"

namespace rve {

/// Number of Voigt components: 6 in 3D (11, 22, 33, 12, 13, 23), 3 in 2D (11, 22, 12).
/// Shear components are engineering strains.
constexpr int voigt_size(int dim) { return dim == 3 ? 6 : 3; }

/// Constituent law sigma = D epsilon in the Voigt order above.
struct ElasticityMatrix {
  int dim = 3;
  Eigen::MatrixXd values;
};

/// Isotropic D. Throws ConfigError for invalid phases (including nu >= 0.5).
ElasticityMatrix elasticity_matrix(const MaterialPhase& phase, int dim,
                                   PlaneAssumption plane = PlaneAssumption::stress);

/// Nodal coordinates of an element as a (nodes x dim) matrix.
Eigen::MatrixXd element_coordinates(const Mesh& mesh, std::size_t element);

/// Full-Gauss (2x2x2 hex8, 2x2 quad4) stiffness. Dof order is node-major:
/// (u0, v0[, w0], u1, ...). Throws MeshError for a non-positive Jacobian.
Eigen::MatrixXd element_stiffness(const Eigen::MatrixXd& coords, const ElasticityMatrix& d);

/// Integral of det J over the element (unit thickness in 2D).
double element_volume(const Eigen::MatrixXd& coords);

struct ElementResponse {
  Eigen::VectorXd stress;  ///< D B(centroid) u_e
  double energy = 0.0;     ///< 1/2 u_e^T k_e u_e
};

ElementResponse element_stress(const Eigen::VectorXd& element_displacement,
                               const Eigen::MatrixXd& coords, const ElasticityMatrix& d);

/// Centroid strain B(0) u_e, engineering shear.
Eigen::VectorXd centroid_strain(const Eigen::VectorXd& element_displacement,
                                const Eigen::MatrixXd& coords);

/// One elasticity matrix per phase, indexed by Phase.
using PhaseMatrices = std::array<ElasticityMatrix, 2>;

PhaseMatrices phase_matrices(const RveSpec& spec);

/// Assembled stiffness with dof index node * dim + component.
struct GlobalSystem {
  int dofs_per_node = 3;
  CsrMatrix stiffness;

  std::size_t dof_count() const noexcept { return static_cast<std::size_t>(stiffness.rows); }
};

/// Scatter-adds element matrices in element order; the result is
/// bit-identical for a given mesh.
GlobalSystem assemble(const Mesh& mesh, const PhaseMatrices& phases);

/// Element dof values gathered from a global vector.
Eigen::VectorXd gather(const Mesh& mesh, std::size_t element, std::span<const double> u);

}  // namespace rve
