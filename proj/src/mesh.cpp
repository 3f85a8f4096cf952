#include "savmhd/mesh.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace savmhd {

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point& a = vertices[tri[0]];
  const Point& b = vertices[tri[1]];
  const Point& c = vertices[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point Mesh::edge_midpoint(int e) const {
  const Point& a = vertices[edges[e][0]];
  const Point& b = vertices[edges[e][1]];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

double Mesh::edge_length(int e) const {
  const Point& a = vertices[edges[e][0]];
  const Point& b = vertices[edges[e][1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

Mesh build_unit_square_mesh(int n_subdiv) {
  if (n_subdiv < 1) {
    throw std::invalid_argument("build_unit_square_mesh: n_subdiv must be >= 1, got " +
                                std::to_string(n_subdiv));
  }
  Mesh mesh;
  mesh.n_subdiv = n_subdiv;
  const int n = n_subdiv;
  const int stride = n + 1;

  mesh.vertices.reserve(static_cast<std::size_t>(stride) * stride);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // i / n rather than i * h so that the last row lands exactly on 1.
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }

  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = j * stride + i;
      const int lr = ll + 1;
      const int ul = ll + stride;
      const int ur = ul + 1;
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> edge_use;
  mesh.triangle_edges.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int from = tri[(k + 1) % 3];
      const int to = tri[(k + 2) % 3];
      const std::pair<int, int> key{std::min(from, to), std::max(from, to)};
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        mesh.edges.push_back({key.first, key.second});
        edge_use.push_back(0);
      }
      ++edge_use[it->second];
      mesh.triangle_edges[t][k] = EdgeRef{it->second, from < to ? 1 : -1};
    }
  }

  mesh.boundary_edge.assign(mesh.edges.size(), false);
  mesh.boundary_vertex.assign(mesh.vertices.size(), false);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (edge_use[e] == 1) {
      mesh.boundary_edge[e] = true;
      mesh.boundary_vertex[mesh.edges[e][0]] = true;
      mesh.boundary_vertex[mesh.edges[e][1]] = true;
    }
  }
  return mesh;
}

const char* to_string(MeshViolation::Kind kind) {
  switch (kind) {
    case MeshViolation::Kind::NegativeArea: return "negative area";
    case MeshViolation::Kind::EulerRelation: return "euler relation";
    case MeshViolation::Kind::EdgeAdjacency: return "edge adjacency";
    case MeshViolation::Kind::Orientation: return "orientation";
    case MeshViolation::Kind::EdgeOrder: return "edge order";
    case MeshViolation::Kind::BoundaryFlag: return "boundary flag";
  }
  return "unknown";
}

std::vector<MeshViolation> validate_mesh(const Mesh& mesh) {
  using Kind = MeshViolation::Kind;
  std::vector<MeshViolation> out;
  auto report = [&out](Kind kind, int entity, std::string what) {
    out.push_back({kind, entity, std::string(to_string(kind)) + ": " + std::move(what)});
  };

  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();

  if (mesh.triangle_edges.size() != mesh.triangles.size()) {
    report(Kind::EdgeAdjacency, -1, "triangle_edges has " + std::to_string(mesh.triangle_edges.size()) +
                                        " entries for " + std::to_string(nt) + " triangles");
    return out;
  }

  for (int e = 0; e < ne; ++e) {
    const auto& edge = mesh.edges[e];
    if (edge[0] < 0 || edge[1] >= nv || edge[0] >= edge[1]) {
      report(Kind::EdgeOrder, e, "edge " + std::to_string(e) + " is not stored as (low, high)");
    }
  }

  std::vector<bool> degenerate(nt, false);
  for (int t = 0; t < nt; ++t) {
    const double area = mesh.signed_area(t);
    if (!(area > 0.0)) {
      degenerate[t] = true;
      report(Kind::NegativeArea, t, "triangle " + std::to_string(t) + " has signed area " + std::to_string(area));
    }
  }

  if (nv - ne + nt != 1) {
    report(Kind::EulerRelation, -1,
           "V - E + T = " + std::to_string(nv - ne + nt) + " (V=" + std::to_string(nv) +
               ", E=" + std::to_string(ne) + ", T=" + std::to_string(nt) + ")");
  }

  std::vector<int> use(ne, 0);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const EdgeRef ref = mesh.triangle_edges[t][k];
      if (ref.index < 0 || ref.index >= ne) {
        report(Kind::EdgeAdjacency, t, "triangle " + std::to_string(t) + " references missing edge");
        continue;
      }
      ++use[ref.index];
      if (degenerate[t]) continue;
      const int from = tri[(k + 1) % 3];
      const int to = tri[(k + 2) % 3];
      const auto& edge = mesh.edges[ref.index];
      const bool same_edge = std::min(from, to) == edge[0] && std::max(from, to) == edge[1];
      const int expected = from < to ? 1 : -1;
      if (!same_edge || ref.sign != expected) {
        report(Kind::Orientation, t,
               "triangle " + std::to_string(t) + " local edge " + std::to_string(k) + " has inconsistent orientation");
      }
    }
  }

  for (int e = 0; e < ne; ++e) {
    const bool flagged = e < static_cast<int>(mesh.boundary_edge.size()) && mesh.boundary_edge[e];
    if (use[e] < 1 || use[e] > 2) {
      report(Kind::EdgeAdjacency, e,
             "edge " + std::to_string(e) + " is shared by " + std::to_string(use[e]) + " triangles");
    } else if ((use[e] == 1) != flagged) {
      report(Kind::BoundaryFlag, e, "edge " + std::to_string(e) + " boundary flag disagrees with adjacency");
    }
  }

  std::vector<bool> on_boundary(nv, false);
  for (int e = 0; e < ne; ++e) {
    if (use[e] == 1) {
      on_boundary[mesh.edges[e][0]] = true;
      on_boundary[mesh.edges[e][1]] = true;
    }
  }
  for (int v = 0; v < nv; ++v) {
    const bool flagged = v < static_cast<int>(mesh.boundary_vertex.size()) && mesh.boundary_vertex[v];
    if (flagged != on_boundary[v]) {
      report(Kind::BoundaryFlag, v, "vertex " + std::to_string(v) + " boundary flag disagrees with adjacency");
    }
  }
  return out;
}

}  // namespace savmhd
