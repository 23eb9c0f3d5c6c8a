#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rve {

using NodeId = std::int32_t;
using Point = std::array<double, 3>;

enum class Phase : std::uint8_t { matrix = 0, fiber = 1 };

/// 2D analyses only; 3D is always full continuum.
enum class PlaneAssumption { stress, strain };

/// Isotropic linear-elastic constituent. Modulus in GPa.
struct MaterialPhase {
  double young_modulus = 0.0;
  double poisson_ratio = 0.0;

  /// Throws ConfigError naming `label` when E <= 0 or nu outside (-1, 0.5).
  void validate(std::string_view label) const;
};

/// Square (2D) or cuboid (3D) unit cell with one centred circular fibre.
///
/// Lengths are in mm. In 3D the fibre is a cylinder along `fiber_axis`
/// (0 = x, 1 = y, 2 = z). In 2D the fibre is a disc in the x-y plane and the
/// z entries of `widths` and `divisions` are ignored.
struct RveSpec {
  int dim = 3;
  std::array<double, 3> widths{1.0, 1.0, 1.0};
  double fiber_volume_fraction = 0.47;
  std::array<int, 3> divisions{20, 20, 20};
  int fiber_axis = 2;
  MaterialPhase fiber{379.3, 0.1};
  MaterialPhase matrix{68.3, 0.3};
  double applied_strain = 1e-4;
  PlaneAssumption plane = PlaneAssumption::stress;

  void validate() const;

  /// The two axes spanning the fibre cross-section.
  std::array<int, 2> section_axes() const;
  double fiber_radius() const;
  double volume() const;
};

/// Radius of a disc covering `volume_fraction` of a `width_a` x `width_b`
/// rectangle. Throws ConfigError unless the disc fits strictly inside.
double radius_from_volume_fraction(double volume_fraction, double width_a, double width_b);

/// Structured voxel mesh of an RVE.
///
/// Nodes are numbered x-fastest, then y, then z. Hexahedra use the usual
/// bottom-face-then-top-face counter-clockwise ordering; quadrilaterals are
/// counter-clockwise.
struct Mesh {
  int dim = 3;
  std::array<double, 3> widths{};
  std::array<int, 3> divisions{};
  std::vector<Point> nodes;
  int nodes_per_element = 8;
  std::vector<NodeId> connectivity;
  std::vector<Phase> phases;
  double target_volume_fraction = 0.0;
  double achieved_volume_fraction = 0.0;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t element_count() const noexcept { return phases.size(); }
  std::span<const NodeId> element(std::size_t e) const {
    return {connectivity.data() + e * static_cast<std::size_t>(nodes_per_element),
            static_cast<std::size_t>(nodes_per_element)};
  }
  double volume() const;
  /// Absolute tolerance for coordinate matching, 1e-9 * max width.
  double matching_tolerance() const;
};

Mesh build_mesh(const RveSpec& spec);

/// One exclusive boundary node set: a vertex, the interior of an edge, or the
/// interior of a face.
///
/// `side[a]` is -1 when the set lies on the lower bound of axis `a`, +1 on
/// the upper bound and 0 when the set extends along that axis. Nodes are
/// sorted by their coordinates along the free axes so that paired sets align
/// index by index.
struct BoundarySet {
  std::string name;
  std::array<int, 3> side{};
  std::vector<NodeId> nodes;

  int free_axis_count(int dim) const;
};

/// Exclusive classification of all mesh nodes.
///
/// Vertices are labelled A..H (3D) or A..D (2D). A is the corner at the lower
/// bound of every axis. 3D: B(-,+,-) C(+,+,-) D(+,-,-) E(-,-,+) F(-,+,+)
/// G(+,+,+) H(+,-,+). 2D: B(+,-) C(+,+) D(-,+). Edges and faces are named by
/// the vertex letters they connect, in alphabetical order.
struct NodeSets {
  int dim = 3;
  std::array<double, 3> origin{};
  std::array<double, 3> extent{};
  double tolerance = 0.0;
  std::vector<BoundarySet> vertices;
  std::vector<BoundarySet> edges;
  std::vector<BoundarySet> faces;
  std::vector<NodeId> interior;

  const BoundarySet& find(std::string_view name) const;

  /// Every boundary set, vertices first, then edges, then faces.
  std::vector<const BoundarySet*> all_sets() const;

  /// Translation from the canonical (all-lower-bound) set of the same group to `set`.
  Point pairing_offset(const BoundarySet& set) const;

  /// The set of the same group lying on the lower bound of every bounded axis.
  const BoundarySet& canonical_of(const BoundarySet& set) const;
};

/// Classifies boundary nodes and verifies periodic pairing. Throws MeshError
/// naming the first node without an image on the opposite boundary.
NodeSets classify_boundary(const Mesh& mesh);

}  // namespace rve
