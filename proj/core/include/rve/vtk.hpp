#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "rve/fem.hpp"
#include "rve/homog.hpp"
#include "rve/mesh.hpp"

namespace rve {

/// Von Mises stress of a Voigt stress vector. 2D vectors are treated as plane stress.
double von_mises(const Eigen::VectorXd& stress, int dim);

/// Legacy ASCII unstructured grid: points, cells (hexahedron 12 / quad 9),
/// CELL_DATA phase, stress_<ij> per Voigt component, von_mises;
/// POINT_DATA displacement vectors.
void write_vtk(std::ostream& out, const Mesh& mesh, const PhaseMatrices& phases, const CaseResult& result,
               std::string_view title);

/// One `case_<n>.vtk` per load case in `dir` (created if needed). Returns the paths written.
std::vector<std::filesystem::path> export_fields(const Mesh& mesh, const PhaseMatrices& phases,
                                                 std::span<const CaseResult> cases,
                                                 const std::filesystem::path& dir);

}  // namespace rve
