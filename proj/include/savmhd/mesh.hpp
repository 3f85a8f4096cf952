#pragma once

#include <array>
#include <string>
#include <vector>

namespace savmhd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Reference from a triangle to one of its edges. `sign` is +1 when the
/// counter-clockwise traversal of the triangle runs from the edge's low vertex
/// to its high vertex, -1 otherwise.
struct EdgeRef {
  int index = -1;
  int sign = 0;
};

/// Structured triangulation of the unit square.
///
/// Local edge i of a triangle is the edge opposite local vertex i, i.e. the
/// edge (v[i+1], v[i+2]) traversed in that order. Edges are stored with their
/// vertex indices sorted (low, high); this fixes a global orientation that the
/// Raviart-Thomas degrees of freedom use.
struct Mesh {
  int n_subdiv = 0;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<EdgeRef, 3>> triangle_edges;
  std::vector<bool> boundary_vertex;
  std::vector<bool> boundary_edge;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  double h() const { return 1.0 / n_subdiv; }

  /// Signed area; positive for counter-clockwise triangles.
  double signed_area(int t) const;
  Point edge_midpoint(int e) const;
  double edge_length(int e) const;
};

/// Uniform (n+1)x(n+1) vertex grid, each cell cut along its lower-left to
/// upper-right diagonal. Throws std::invalid_argument for n_subdiv < 1.
Mesh build_unit_square_mesh(int n_subdiv);

struct MeshViolation {
  enum class Kind { NegativeArea, EulerRelation, EdgeAdjacency, Orientation, EdgeOrder, BoundaryFlag };
  Kind kind;
  int entity = -1;  // triangle, edge or vertex index, -1 for global checks
  std::string message;
};

const char* to_string(MeshViolation::Kind kind);

/// Empty iff every Mesh invariant holds. Triangles with non-positive area are
/// reported once and skipped by the orientation check.
std::vector<MeshViolation> validate_mesh(const Mesh& mesh);

}  // namespace savmhd
