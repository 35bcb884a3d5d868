#pragma once

// Structured quadrilateral mesh of the unit square and its two-strip split.
//
// Vertex (i, j) has index j * (n + 1) + i and sits at (i / n, j / n). Cell
// (i, j) has index j * n + i with vertices V0 = (i, j), V1 = (i + 1, j),
// V2 = (i, j + 1), V3 = (i + 1, j + 1). Local edges follow the reference
// cell ordering E0 = {V0, V2}, E1 = {V1, V3}, E2 = {V0, V1}, E3 = {V2, V3}.
// Every global edge points from its lower to its higher vertex index.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnddm {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr std::array<std::array<int, 2>, 4> kLocalEdgeVertices{{{0, 2}, {1, 3}, {0, 1}, {2, 3}}};

struct CellEdges {
  std::array<int, 4> edge{};
  /// +1 when the local direction V_e1 -> V_e2 matches the global edge direction.
  std::array<int, 4> sign{};
};

struct Mesh {
  int n = 0;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<std::array<int, 2>> edges;
  std::vector<CellEdges> cell_edges;
  /// Up to two adjacent cells per edge; -1 marks a missing neighbor.
  std::vector<std::array<int, 2>> edge_cells;

  double h() const { return 1.0 / n; }

  Point2 edge_midpoint(int e) const {
    const auto& a = vertices[edges[e][0]];
    const auto& b = vertices[edges[e][1]];
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  }

  /// Unit vector along the global edge direction.
  Point2 edge_tangent(int e) const {
    const auto& a = vertices[edges[e][0]];
    const auto& b = vertices[edges[e][1]];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    return {dx / len, dy / len};
  }

  double edge_length(int e) const {
    const auto& a = vertices[edges[e][0]];
    const auto& b = vertices[edges[e][1]];
    return std::hypot(b.x - a.x, b.y - a.y);
  }

  Point2 cell_center(int c) const {
    const auto& v0 = vertices[cells[c][0]];
    const auto& v3 = vertices[cells[c][3]];
    return {0.5 * (v0.x + v3.x), 0.5 * (v0.y + v3.y)};
  }

  bool is_boundary_edge(int e) const { return edge_cells[e][1] < 0; }

  /// Cell containing p; points on cell boundaries resolve to the cell above/right
  /// except on the outer boundary.
  int locate(Point2 p) const {
    const int i = std::clamp(static_cast<int>(std::floor(p.x * n)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(p.y * n)), 0, n - 1);
    return j * n + i;
  }
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline MeshPtr build_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_mesh: n must be >= 1, got " + std::to_string(n));
  auto mesh = std::make_shared<Mesh>();
  mesh->n = n;
  const int nv = n + 1;
  mesh->vertices.reserve(static_cast<std::size_t>(nv) * nv);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i)
      mesh->vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  std::map<std::pair<int, int>, int> edge_index;
  mesh->cells.reserve(static_cast<std::size_t>(n) * n);
  mesh->cell_edges.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v0 = j * nv + i;
      const std::array<int, 4> cell{v0, v0 + 1, v0 + nv, v0 + nv + 1};
      const int c = static_cast<int>(mesh->cells.size());
      mesh->cells.push_back(cell);
      CellEdges ce;
      for (int m = 0; m < 4; ++m) {
        const int a = cell[kLocalEdgeVertices[m][0]];
        const int b = cell[kLocalEdgeVertices[m][1]];
        const auto key = std::minmax(a, b);
        auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(mesh->edges.size()));
        if (inserted) {
          mesh->edges.push_back({key.first, key.second});
          mesh->edge_cells.push_back({c, -1});
        } else {
          mesh->edge_cells[it->second][1] = c;
        }
        ce.edge[m] = it->second;
        ce.sign[m] = a < b ? 1 : -1;
      }
      mesh->cell_edges.push_back(ce);
    }
  }
  return mesh;
}

enum class BoundaryKind { Incident, Absorbing, Interface };

struct BoundaryTag {
  BoundaryKind kind = BoundaryKind::Absorbing;
  int neighbor = -1;  // subdomain id across an Interface edge
};

inline const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Incident: return "incident";
    case BoundaryKind::Absorbing: return "absorbing";
    case BoundaryKind::Interface: return "interface";
  }
  return "?";
}

struct Subdomain {
  MeshPtr mesh;
  int id = 0;
  std::vector<int> cells;  // ascending global cell indices
  std::map<int, BoundaryTag> boundary_tags;
  std::map<int, Point2> outward_normals;
  // Bounding box of the subdomain, used to keep point location inside it.
  Point2 lower{0.0, 0.0};
  Point2 upper{1.0, 1.0};

  /// Cell of this subdomain containing p (p is clamped into the subdomain box).
  int locate(Point2 p) const {
    const double eps = 1e-12;
    p.x = std::clamp(p.x, lower.x + eps, upper.x - eps);
    p.y = std::clamp(p.y, lower.y + eps, upper.y - eps);
    return mesh->locate(p);
  }

  std::vector<int> edges_with(BoundaryKind kind) const {
    std::vector<int> out;
    for (const auto& [e, tag] : boundary_tags)
      if (tag.kind == kind) out.push_back(e);
    return out;
  }
};

using SubdomainPtr = std::shared_ptr<const Subdomain>;

namespace detail {

// Tags every edge that appears once among `cells`; `tag_for` decides the kind
// from the edge midpoint and the outward normal.
template <class TagFor>
void tag_boundary(Subdomain& sub, TagFor&& tag_for) {
  const Mesh& mesh = *sub.mesh;
  std::map<int, int> count;
  std::map<int, int> owner;
  for (int c : sub.cells)
    for (int e : mesh.cell_edges[c].edge) {
      ++count[e];
      owner[e] = c;
    }
  for (const auto& [e, k] : count) {
    if (k != 1) continue;
    const Point2 mid = mesh.edge_midpoint(e);
    const Point2 cc = mesh.cell_center(owner[e]);
    const Point2 t = mesh.edge_tangent(e);
    Point2 normal{t.y, -t.x};
    if (normal.x * (mid.x - cc.x) + normal.y * (mid.y - cc.y) < 0) normal = {-normal.x, -normal.y};
    sub.boundary_tags[e] = tag_for(mid, normal);
    sub.outward_normals[e] = normal;
  }
}

inline void set_box(Subdomain& sub) {
  const Mesh& mesh = *sub.mesh;
  sub.lower = {1e300, 1e300};
  sub.upper = {-1e300, -1e300};
  for (int c : sub.cells)
    for (int v : mesh.cells[c]) {
      sub.lower.x = std::min(sub.lower.x, mesh.vertices[v].x);
      sub.lower.y = std::min(sub.lower.y, mesh.vertices[v].y);
      sub.upper.x = std::max(sub.upper.x, mesh.vertices[v].x);
      sub.upper.y = std::max(sub.upper.y, mesh.vertices[v].y);
    }
}

inline constexpr double kGeomTol = 1e-12;

}  // namespace detail

/// Splits the unit square at y = 0.5: bottom strip is subdomain 0, top strip 1.
/// Bottom boundary is Incident, the top and the two sides are Absorbing.
inline std::pair<SubdomainPtr, SubdomainPtr> partition_two(const MeshPtr& mesh) {
  if (mesh->n % 2 != 0)
    throw std::invalid_argument("partition_two: n must be even so the interface lies on y = 0.5, got n = " +
                                std::to_string(mesh->n));
  std::array<std::shared_ptr<Subdomain>, 2> subs;
  for (int s = 0; s < 2; ++s) {
    subs[s] = std::make_shared<Subdomain>();
    subs[s]->mesh = mesh;
    subs[s]->id = s;
  }
  for (int c = 0; c < static_cast<int>(mesh->cells.size()); ++c)
    subs[mesh->cell_center(c).y < 0.5 ? 0 : 1]->cells.push_back(c);

  for (int s = 0; s < 2; ++s) {
    const int other = 1 - s;
    detail::tag_boundary(*subs[s], [&](Point2 mid, Point2) {
      if (std::abs(mid.y - 0.5) < detail::kGeomTol) return BoundaryTag{BoundaryKind::Interface, other};
      if (std::abs(mid.y) < detail::kGeomTol) return BoundaryTag{BoundaryKind::Incident, -1};
      return BoundaryTag{BoundaryKind::Absorbing, -1};
    });
    detail::set_box(*subs[s]);
  }
  return {subs[0], subs[1]};
}

enum class OuterBoundary {
  Standard,     // bottom Incident, remaining sides Absorbing
  AllIncident,  // the tangential trace is prescribed everywhere
};

/// The whole mesh as a single subdomain (id 0), used for monolithic solves.
inline SubdomainPtr whole_domain(const MeshPtr& mesh, OuterBoundary policy = OuterBoundary::Standard) {
  auto sub = std::make_shared<Subdomain>();
  sub->mesh = mesh;
  sub->id = 0;
  sub->cells.resize(mesh->cells.size());
  for (std::size_t c = 0; c < mesh->cells.size(); ++c) sub->cells[c] = static_cast<int>(c);
  detail::tag_boundary(*sub, [&](Point2 mid, Point2) {
    if (policy == OuterBoundary::AllIncident || std::abs(mid.y) < detail::kGeomTol)
      return BoundaryTag{BoundaryKind::Incident, -1};
    return BoundaryTag{BoundaryKind::Absorbing, -1};
  });
  detail::set_box(*sub);
  return sub;
}

/// Interface edges ordered by midpoint x, left to right.
inline std::vector<int> interface_edges(const Subdomain& sub) {
  std::vector<int> out = sub.edges_with(BoundaryKind::Interface);
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) {
    return sub.mesh->edge_midpoint(a).x < sub.mesh->edge_midpoint(b).x;
  });
  return out;
}

}  // namespace nnddm
