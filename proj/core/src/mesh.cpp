#include "rve/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "rve/errors.hpp"

namespace rve {

void MaterialPhase::validate(std::string_view label) const {
  if (!(young_modulus > 0.0) || !std::isfinite(young_modulus)) {
    throw ConfigError(fmt::format("{}.young_modulus: must be positive, got {}", label, young_modulus));
  }
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) {
    throw ConfigError(
        fmt::format("{}.poisson_ratio: must lie in (-1, 0.5), got {}", label, poisson_ratio));
  }
}

std::array<int, 2> RveSpec::section_axes() const {
  if (dim == 2) return {0, 1};
  switch (fiber_axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

void RveSpec::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError(fmt::format("dimension must be 2 or 3, got {}", dim));
  static constexpr std::array<char, 3> kAxis{'x', 'y', 'z'};
  for (int a = 0; a < dim; ++a) {
    if (!(widths[a] > 0.0) || !std::isfinite(widths[a])) {
      throw ConfigError(fmt::format("width along {} must be positive, got {}", kAxis[a], widths[a]));
    }
    if (divisions[a] < 2) {
      throw ConfigError(
          fmt::format("divisions along {} must be at least 2, got {}", kAxis[a], divisions[a]));
    }
  }
  if (dim == 3 && (fiber_axis < 0 || fiber_axis > 2)) {
    throw ConfigError(fmt::format("fibre axis must be 0, 1 or 2, got {}", fiber_axis));
  }
  if (!(fiber_volume_fraction > 0.0 && fiber_volume_fraction < 1.0)) {
    throw ConfigError(
        fmt::format("fibre volume fraction must lie in (0, 1), got {}", fiber_volume_fraction));
  }
  if (!(applied_strain > 0.0) || !std::isfinite(applied_strain)) {
    throw ConfigError(fmt::format("applied strain must be positive, got {}", applied_strain));
  }
  fiber.validate("fiber");
  matrix.validate("matrix");
  (void)fiber_radius();
}

double RveSpec::fiber_radius() const {
  const auto [a, b] = section_axes();
  return radius_from_volume_fraction(fiber_volume_fraction, widths[a], widths[b]);
}

double RveSpec::volume() const {
  double v = widths[0] * widths[1];
  return dim == 3 ? v * widths[2] : v;
}

double radius_from_volume_fraction(double volume_fraction, double width_a, double width_b) {
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) {
    throw ConfigError(fmt::format("fibre volume fraction must lie in (0, 1), got {}", volume_fraction));
  }
  const double r = std::sqrt(volume_fraction * width_a * width_b / std::numbers::pi);
  if (!(2.0 * r < std::min(width_a, width_b))) {
    throw ConfigError(fmt::format(
        "volume fraction geometrically unattainable: {} needs radius {} but the section is {} x {}",
        volume_fraction, r, width_a, width_b));
  }
  return r;
}

double Mesh::volume() const {
  return dim == 3 ? widths[0] * widths[1] * widths[2] : widths[0] * widths[1];
}

double Mesh::matching_tolerance() const {
  return 1e-9 * *std::max_element(widths.begin(), widths.begin() + dim);
}

Mesh build_mesh(const RveSpec& spec) {
  spec.validate();

  Mesh mesh;
  mesh.dim = spec.dim;
  mesh.widths = spec.widths;
  mesh.divisions = spec.divisions;
  if (spec.dim == 2) {
    mesh.widths[2] = 0.0;
    mesh.divisions[2] = 0;
  }
  mesh.target_volume_fraction = spec.fiber_volume_fraction;

  const int nx = spec.divisions[0];
  const int ny = spec.divisions[1];
  const int nz = spec.dim == 3 ? spec.divisions[2] : 0;

  auto coord = [&](int axis, int i) {
    return spec.widths[axis] * static_cast<double>(i) / static_cast<double>(spec.divisions[axis]);
  };

  mesh.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        mesh.nodes.push_back({coord(0, i), coord(1, j), spec.dim == 3 ? coord(2, k) : 0.0});
      }
    }
  }

  auto node_id = [&](int i, int j, int k) {
    return static_cast<NodeId>((static_cast<std::size_t>(k) * (ny + 1) + j) * (nx + 1) + i);
  };

  const double radius = spec.fiber_radius();
  const auto [sa, sb] = spec.section_axes();
  const double ca = 0.5 * spec.widths[sa];
  const double cb = 0.5 * spec.widths[sb];

  mesh.nodes_per_element = spec.dim == 3 ? 8 : 4;
  const std::size_t n_elements = static_cast<std::size_t>(nx) * ny * std::max(nz, 1);
  mesh.connectivity.reserve(n_elements * mesh.nodes_per_element);
  mesh.phases.reserve(n_elements);

  std::size_t fiber_count = 0;
  for (int k = 0; k < std::max(nz, 1); ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (spec.dim == 3) {
          const std::array<NodeId, 8> hex{node_id(i, j, k),         node_id(i + 1, j, k),
                                          node_id(i + 1, j + 1, k), node_id(i, j + 1, k),
                                          node_id(i, j, k + 1),     node_id(i + 1, j, k + 1),
                                          node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)};
          mesh.connectivity.insert(mesh.connectivity.end(), hex.begin(), hex.end());
        } else {
          const std::array<NodeId, 4> quad{node_id(i, j, 0), node_id(i + 1, j, 0),
                                           node_id(i + 1, j + 1, 0), node_id(i, j + 1, 0)};
          mesh.connectivity.insert(mesh.connectivity.end(), quad.begin(), quad.end());
        }
        const std::array<int, 3> idx{i, j, k};
        const double pa = 0.5 * (coord(sa, idx[sa]) + coord(sa, idx[sa] + 1)) - ca;
        const double pb = 0.5 * (coord(sb, idx[sb]) + coord(sb, idx[sb] + 1)) - cb;
        // Centroids exactly on the circle count as fibre.
        const bool inside = pa * pa + pb * pb <= radius * radius;
        mesh.phases.push_back(inside ? Phase::fiber : Phase::matrix);
        fiber_count += inside ? 1 : 0;
      }
    }
  }
  // All voxels have the same volume.
  mesh.achieved_volume_fraction =
      static_cast<double>(fiber_count) / static_cast<double>(mesh.element_count());
  return mesh;
}

// ---------------------------------------------------------------------------
// Boundary classification

int BoundarySet::free_axis_count(int dim) const {
  int n = 0;
  for (int a = 0; a < dim; ++a) n += side[a] == 0 ? 1 : 0;
  return n;
}

namespace {

using Side = std::array<int, 3>;

char vertex_letter(const Side& s, int dim) {
  if (dim == 2) {
    if (s[0] < 0) return s[1] < 0 ? 'A' : 'D';
    return s[1] < 0 ? 'B' : 'C';
  }
  static constexpr std::array<char, 8> kLetters{
      // index = (x>0) + 2*(y>0) + 4*(z>0)
      'A', 'D', 'B', 'C', 'E', 'H', 'F', 'G'};
  const int idx = (s[0] > 0 ? 1 : 0) + (s[1] > 0 ? 2 : 0) + (s[2] > 0 ? 4 : 0);
  return kLetters[idx];
}

// Letters of all vertices touched by a set, alphabetically.
std::string set_name(const Side& s, int dim) {
  std::vector<Side> corners{s};
  for (int a = 0; a < dim; ++a) {
    if (s[a] != 0) continue;
    std::vector<Side> next;
    for (const Side& c : corners) {
      Side lo = c;
      Side hi = c;
      lo[a] = -1;
      hi[a] = 1;
      next.push_back(lo);
      next.push_back(hi);
    }
    corners = std::move(next);
  }
  std::string name;
  for (const Side& c : corners) name.push_back(vertex_letter(c, dim));
  std::sort(name.begin(), name.end());
  return name;
}

Side canonical_side(const Side& s) {
  Side c = s;
  for (int& v : c) v = v != 0 ? -1 : 0;
  return c;
}

bool matches(const Point& p, const Point& q, const Point& offset, int dim, double tol) {
  for (int a = 0; a < dim; ++a) {
    if (std::abs(p[a] - q[a] - offset[a]) > tol) return false;
  }
  return true;
}

}  // namespace

const BoundarySet& NodeSets::find(std::string_view name) const {
  for (const BoundarySet* s : all_sets()) {
    if (s->name == name) return *s;
  }
  throw MeshError(fmt::format("no boundary set named '{}'", name));
}

std::vector<const BoundarySet*> NodeSets::all_sets() const {
  std::vector<const BoundarySet*> out;
  out.reserve(vertices.size() + edges.size() + faces.size());
  for (const auto& s : vertices) out.push_back(&s);
  for (const auto& s : edges) out.push_back(&s);
  for (const auto& s : faces) out.push_back(&s);
  return out;
}

Point NodeSets::pairing_offset(const BoundarySet& set) const {
  Point offset{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    if (set.side[a] > 0) offset[a] = extent[a];
  }
  return offset;
}

const BoundarySet& NodeSets::canonical_of(const BoundarySet& set) const {
  const Side want = canonical_side(set.side);
  for (const BoundarySet* s : all_sets()) {
    if (s->side == want) return *s;
  }
  throw MeshError(fmt::format("boundary set '{}' has no canonical partner", set.name));
}

NodeSets classify_boundary(const Mesh& mesh) {
  const int dim = mesh.dim;
  NodeSets sets;
  sets.dim = dim;
  sets.tolerance = mesh.matching_tolerance();
  const double tol = sets.tolerance;

  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    lo[a] = hi[a] = mesh.nodes.empty() ? 0.0 : mesh.nodes.front()[a];
  }
  for (const Point& p : mesh.nodes) {
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  sets.origin = lo;
  for (int a = 0; a < dim; ++a) sets.extent[a] = hi[a] - lo[a];

  std::map<Side, std::vector<NodeId>> groups;
  // Every possible set exists, even if empty (coarse meshes have empty edge interiors).
  const int combos = dim == 3 ? 27 : 9;
  for (int c = 0; c < combos; ++c) {
    Side s{c % 3 - 1, (c / 3) % 3 - 1, dim == 3 ? c / 9 - 1 : 0};
    if (s != Side{0, 0, 0}) groups[s];
  }

  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const Point& p = mesh.nodes[n];
    Side s{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      if (std::abs(p[a] - lo[a]) <= tol) {
        s[a] = -1;
      } else if (std::abs(p[a] - hi[a]) <= tol) {
        s[a] = 1;
      }
    }
    if (s == Side{0, 0, 0}) {
      sets.interior.push_back(static_cast<NodeId>(n));
    } else {
      groups[s].push_back(static_cast<NodeId>(n));
    }
  }

  for (auto& [side, nodes] : groups) {
    BoundarySet set;
    set.side = side;
    set.name = set_name(side, dim);
    // Tolerance-aware lexicographic order over the free axes, slowest axis first.
    std::sort(nodes.begin(), nodes.end(), [&](NodeId l, NodeId r) {
      for (int a = dim - 1; a >= 0; --a) {
        if (side[a] != 0) continue;
        const double d = mesh.nodes[l][a] - mesh.nodes[r][a];
        if (std::abs(d) > tol) return d < 0.0;
      }
      return false;
    });
    set.nodes = std::move(nodes);
    switch (dim - set.free_axis_count(dim)) {
      case 3: sets.vertices.push_back(std::move(set)); break;
      case 2: (dim == 2 ? sets.vertices : sets.edges).push_back(std::move(set)); break;
      default: (dim == 2 ? sets.edges : sets.faces).push_back(std::move(set)); break;
    }
  }

  auto by_name = [](const BoundarySet& l, const BoundarySet& r) { return l.name < r.name; };
  std::sort(sets.vertices.begin(), sets.vertices.end(), by_name);
  std::sort(sets.edges.begin(), sets.edges.end(), by_name);
  std::sort(sets.faces.begin(), sets.faces.end(), by_name);

  // Periodic pairing check against the canonical set of each group.
  for (const BoundarySet* set : sets.all_sets()) {
    const BoundarySet& master = sets.canonical_of(*set);
    if (&master == set) continue;
    const Point offset = sets.pairing_offset(*set);

    bool aligned = master.nodes.size() == set->nodes.size();
    for (std::size_t i = 0; aligned && i < set->nodes.size(); ++i) {
      aligned = matches(mesh.nodes[set->nodes[i]], mesh.nodes[master.nodes[i]], offset, dim, tol);
    }
    if (aligned) continue;

    auto report = [&](NodeId node, const BoundarySet& where, const BoundarySet& other) {
      const Point& p = mesh.nodes[node];
      return MeshError(fmt::format(
          "mesh is not periodic: node {} at ({}, {}, {}) in set '{}' has no image in set '{}'", node,
          p[0], p[1], p[2], where.name, other.name));
    };
    for (NodeId node : set->nodes) {
      const bool found = std::any_of(master.nodes.begin(), master.nodes.end(), [&](NodeId m) {
        return matches(mesh.nodes[node], mesh.nodes[m], offset, dim, tol);
      });
      if (!found) throw report(node, *set, master);
    }
    for (NodeId node : master.nodes) {
      const bool found = std::any_of(set->nodes.begin(), set->nodes.end(), [&](NodeId s) {
        return matches(mesh.nodes[s], mesh.nodes[node], offset, dim, tol);
      });
      if (!found) throw report(node, master, *set);
    }
    throw MeshError(fmt::format("mesh is not periodic: sets '{}' and '{}' contain coincident nodes",
                                set->name, master.name));
  }
  return sets;
}

}  // namespace rve
