#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rve/fem.hpp"
#include "rve/mesh.hpp"
#include "rve/sparse.hpp"

namespace rve {

using Dof = std::int32_t;

/// Prescribed macroscopic strain in Voigt form with engineering shear.
class MacroStrain {
 public:
  explicit MacroStrain(int dim);
  MacroStrain(int dim, std::span<const double> voigt);

  /// `magnitude` on Voigt component `component`, zero elsewhere.
  static MacroStrain unit(int dim, int component, double magnitude);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return voigt_size(dim_); }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return values_[static_cast<std::size_t>(i)]; }
  Eigen::VectorXd voigt() const;

  /// Symmetric 3x3 strain tensor; off-diagonals are half the engineering shears.
  Eigen::Matrix3d tensor() const;

  MacroStrain operator+(const MacroStrain& other) const;

 private:
  int dim_;
  std::array<double, 6> values_{};
};

/// u[slave] = u[master] + offset
struct Relation {
  Dof slave = 0;
  Dof master = 0;
  double offset = 0.0;
};

struct Pin {
  Dof dof = 0;
  double value = 0.0;
};

/// Affine master-slave constraints plus prescribed dofs.
struct ConstraintSet {
  int dofs_per_node = 3;
  std::vector<Relation> relations;
  std::vector<Pin> pins;

  /// Throws ConstraintError for chains (a master that is also a slave),
  /// conflicting duplicate slaves or pinned slaves.
  void validate(std::size_t dof_count) const;
};

/// Periodic constraints for every non-canonical boundary node: each
/// displacement component of node q is slaved to the node p of the canonical
/// set with u(q) = u(p) + E (x_q - x_p), where E is the macroscopic strain
/// tensor and x_q - x_p is the constant pairing offset of the set. Canonical
/// masters are the lower face of each pair, the edge through vertex A of each
/// group of parallel edges, and vertex A itself.
ConstraintSet build_constraints(const NodeSets& sets, const MacroStrain& strain);

/// Adds zero-displacement pins on every component of vertex A.
ConstraintSet pin_rigid_body(ConstraintSet constraints, const NodeSets& sets);

/// u_full = T u_r + shift. T has at most one unit entry per row:
/// `column[i]` is the reduced index driving dof i, or -1 for prescribed dofs.
struct RecoveryMap {
  std::vector<CsrMatrix::Index> column;
  std::vector<double> shift;
  CsrMatrix::Index reduced_size = 0;

  std::size_t full_size() const noexcept { return column.size(); }
};

RecoveryMap make_recovery_map(const ConstraintSet& constraints, std::size_t dof_count);

/// K_r = T^T K T.
CsrMatrix reduce_stiffness(const CsrMatrix& k, const RecoveryMap& map);

/// f_r = -T^T K shift.
std::vector<double> reduce_load(const CsrMatrix& k, const RecoveryMap& map);

struct ReducedSystem {
  CsrMatrix stiffness;
  std::vector<double> load;
  RecoveryMap recovery;
};

ReducedSystem reduce_system(const GlobalSystem& system, const ConstraintSet& constraints);

}  // namespace rve
