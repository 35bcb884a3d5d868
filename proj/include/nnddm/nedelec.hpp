#pragma once

// Hierarchic H(curl) basis on the reference square Q = [0,1]^2 built from
// integrated Legendre polynomials, its covariant Piola mapping, and the
// per-subdomain degree-of-freedom numbering.

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "nnddm/errors.hpp"
#include "nnddm/geometry.hpp"

namespace nnddm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Legendre polynomial P_n(x).
inline double legendre(int n, double x) {
  if (n < 0) throw std::invalid_argument("legendre: negative degree");
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int m = 1; m < n; ++m) {
    const double p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Integrated Legendre polynomial L_n on [-1, 1]:
/// L_1 = x, L_2 = (x^2 - 1)/2, (n+1) L_{n+1} = (2n-1) x L_n - (n-2) L_{n-1}.
inline double integrated_legendre(int n, double x) {
  if (n < 1) throw std::invalid_argument("integrated_legendre: n must be >= 1, got " + std::to_string(n));
  if (n == 1) return x;
  double lm1 = x, l = 0.5 * (x * x - 1.0);
  for (int m = 2; m < n; ++m) {
    const double next = ((2.0 * m - 1.0) * x * l - (m - 2.0) * lm1) / (m + 1.0);
    lm1 = l;
    l = next;
  }
  return l;
}

/// d/dx L_n(x) = P_{n-1}(x).
inline double integrated_legendre_derivative(int n, double x) { return legendre(n - 1, x); }

struct BasisOrder {
  int p_edge = 3;  // hierarchic functions per edge beyond the lowest-order one
  int p_cell = 3;

  int edge_functions() const { return 1 + p_edge; }
  int cell_functions() const { return 2 * p_cell * p_cell + 2 * p_cell; }
  int functions_per_cell() const { return 4 * edge_functions() + cell_functions(); }
  /// Gauss points per direction used for assembly.
  int quadrature_points() const { return p_edge + 2; }

  void validate() const {
    if (p_edge < 0 || p_cell < 0)
      throw std::invalid_argument("BasisOrder: p_edge and p_cell must be non-negative");
  }
};

enum class ShapeKind { LowestOrderEdge, HigherOrderEdge, CellType1, CellType2, CellType3x, CellType3y };

struct RefShape {
  ShapeKind kind = ShapeKind::LowestOrderEdge;
  int edge = 0;  // local edge m for edge shapes
  int i = 0;
  int j = 0;
};

namespace detail {

// Bilinear vertex functions lambda_a and the sums sigma_a on Q.
inline double lambda(int a, double x, double y) {
  switch (a) {
    case 0: return (1 - x) * (1 - y);
    case 1: return x * (1 - y);
    case 2: return (1 - x) * y;
    default: return x * y;
  }
}
inline Vec2 grad_lambda(int a, double x, double y) {
  switch (a) {
    case 0: return {-(1 - y), -(1 - x)};
    case 1: return {1 - y, -x};
    case 2: return {-y, 1 - x};
    default: return {y, x};
  }
}
inline double sigma(int a, double x, double y) {
  switch (a) {
    case 0: return (1 - x) + (1 - y);
    case 1: return x + (1 - y);
    case 2: return (1 - x) + y;
    default: return x + y;
  }
}
inline Vec2 grad_sigma(int a) {
  switch (a) {
    case 0: return {-1, -1};
    case 1: return {1, -1};
    case 2: return {-1, 1};
    default: return {1, 1};
  }
}

inline void check_shape(const RefShape& s, const BasisOrder& order) {
  bool ok = true;
  switch (s.kind) {
    case ShapeKind::LowestOrderEdge: ok = s.edge >= 0 && s.edge < 4; break;
    case ShapeKind::HigherOrderEdge: ok = s.edge >= 0 && s.edge < 4 && s.i >= 0 && s.i < order.p_edge; break;
    case ShapeKind::CellType1:
    case ShapeKind::CellType2:
      ok = s.i >= 0 && s.i < order.p_cell && s.j >= 0 && s.j < order.p_cell;
      break;
    case ShapeKind::CellType3x: ok = s.i == 0 && s.j >= 0 && s.j < order.p_cell; break;
    case ShapeKind::CellType3y: ok = s.j == 0 && s.i >= 0 && s.i < order.p_cell; break;
  }
  if (!ok) throw std::invalid_argument("reference shape index out of range for the basis order");
}

}  // namespace detail

/// Value of a reference shape at (x, y) in Q.
inline Vec2 ref_shape_value(const RefShape& s, const BasisOrder& order, Point2 p) {
  detail::check_shape(s, order);
  const double x = p.x, y = p.y;
  switch (s.kind) {
    case ShapeKind::LowestOrderEdge:
    case ShapeKind::HigherOrderEdge: {
      const int e1 = kLocalEdgeVertices[s.edge][0], e2 = kLocalEdgeVertices[s.edge][1];
      const Vec2 ds = detail::grad_sigma(e2) + (-1.0) * detail::grad_sigma(e1);
      const double lsum = detail::lambda(e1, x, y) + detail::lambda(e2, x, y);
      if (s.kind == ShapeKind::LowestOrderEdge) return (0.5 * lsum) * ds;
      const double arg = detail::sigma(e2, x, y) - detail::sigma(e1, x, y);
      const Vec2 dl = detail::grad_lambda(e1, x, y) + detail::grad_lambda(e2, x, y);
      // grad(L(arg) * lsum)
      return (integrated_legendre_derivative(s.i + 2, arg) * lsum) * ds +
             integrated_legendre(s.i + 2, arg) * dl;
    }
    case ShapeKind::CellType1:
    case ShapeKind::CellType2: {
      const double xi = 2 * x - 1, eta = 2 * y - 1;
      const double a = integrated_legendre(s.i + 2, xi), da = 2 * integrated_legendre_derivative(s.i + 2, xi);
      const double b = integrated_legendre(s.j + 2, eta), db = 2 * integrated_legendre_derivative(s.j + 2, eta);
      if (s.kind == ShapeKind::CellType1) return {da * b, a * db};
      return {da * b, -a * db};
    }
    case ShapeKind::CellType3x: return {integrated_legendre(s.j + 2, 2 * y - 1), 0.0};
    case ShapeKind::CellType3y: return {0.0, integrated_legendre(s.i + 2, 2 * x - 1)};
  }
  return {};
}

/// Scalar curl d v_y/dx - d v_x/dy of a reference shape.
inline double ref_shape_curl(const RefShape& s, const BasisOrder& order, Point2 p) {
  detail::check_shape(s, order);
  const double x = p.x, y = p.y;
  switch (s.kind) {
    case ShapeKind::LowestOrderEdge: {
      const int e1 = kLocalEdgeVertices[s.edge][0], e2 = kLocalEdgeVertices[s.edge][1];
      const Vec2 ds = detail::grad_sigma(e2) + (-1.0) * detail::grad_sigma(e1);
      const Vec2 dl = detail::grad_lambda(e1, x, y) + detail::grad_lambda(e2, x, y);
      return 0.5 * (dl.x * ds.y - dl.y * ds.x);
    }
    case ShapeKind::HigherOrderEdge:
    case ShapeKind::CellType1:
      return 0.0;  // gradients
    case ShapeKind::CellType2: {
      const double xi = 2 * x - 1, eta = 2 * y - 1;
      const double da = 2 * integrated_legendre_derivative(s.i + 2, xi);
      const double db = 2 * integrated_legendre_derivative(s.j + 2, eta);
      return -2.0 * da * db;
    }
    case ShapeKind::CellType3x: return -2.0 * integrated_legendre_derivative(s.j + 2, 2 * y - 1);
    case ShapeKind::CellType3y: return 2.0 * integrated_legendre_derivative(s.i + 2, 2 * x - 1);
  }
  return 0.0;
}

/// Local shape list of one cell: per local edge [lowest, hierarchic 0..p_edge-1],
/// then type 1 (i-major), type 2 (i-major), type 3 in x, type 3 in y.
inline std::vector<RefShape> local_shapes(const BasisOrder& order) {
  std::vector<RefShape> out;
  out.reserve(order.functions_per_cell());
  for (int m = 0; m < 4; ++m) {
    out.push_back({ShapeKind::LowestOrderEdge, m, 0, 0});
    for (int i = 0; i < order.p_edge; ++i) out.push_back({ShapeKind::HigherOrderEdge, m, i, 0});
  }
  for (auto kind : {ShapeKind::CellType1, ShapeKind::CellType2})
    for (int i = 0; i < order.p_cell; ++i)
      for (int j = 0; j < order.p_cell; ++j) out.push_back({kind, -1, i, j});
  for (int j = 0; j < order.p_cell; ++j) out.push_back({ShapeKind::CellType3x, -1, 0, j});
  for (int i = 0; i < order.p_cell; ++i) out.push_back({ShapeKind::CellType3y, -1, i, 0});
  return out;
}

/// Affine cell map x = origin + J * xi with J stored row-major.
struct CellGeometry {
  Point2 origin;
  std::array<double, 4> jacobian{1.0, 0.0, 0.0, 1.0};

  double det() const { return jacobian[0] * jacobian[3] - jacobian[1] * jacobian[2]; }

  Point2 map(Point2 ref) const {
    return {origin.x + jacobian[0] * ref.x + jacobian[1] * ref.y,
            origin.y + jacobian[2] * ref.x + jacobian[3] * ref.y};
  }

  Point2 inverse_map(Point2 phys) const {
    const double d = det();
    const double dx = phys.x - origin.x, dy = phys.y - origin.y;
    return {(jacobian[3] * dx - jacobian[1] * dy) / d, (-jacobian[2] * dx + jacobian[0] * dy) / d};
  }

  static CellGeometry square(Point2 origin, double h) { return {origin, {h, 0.0, 0.0, h}}; }
};

inline CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  const auto& v = mesh.cells[cell];
  const Point2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
  return {p0, {p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y}};
}

namespace detail {
inline double checked_det(const CellGeometry& g) {
  const double d = g.det();
  const double scale = std::abs(g.jacobian[0]) + std::abs(g.jacobian[1]) + std::abs(g.jacobian[2]) +
                       std::abs(g.jacobian[3]);
  if (!(std::abs(d) > 1e-14 * scale * scale)) throw DegenerateCellError("cell Jacobian is singular");
  return d;
}
}  // namespace detail

/// Covariant Piola transform: u_phys = J^{-T} u_ref.
inline Vec2 piola_map(const CellGeometry& g, Vec2 ref_value) {
  const double d = detail::checked_det(g);
  const auto& j = g.jacobian;
  return {(j[3] * ref_value.x - j[2] * ref_value.y) / d, (-j[1] * ref_value.x + j[0] * ref_value.y) / d};
}

/// Curls pick up 1 / det(J) under the covariant map.
inline double piola_map_curl(const CellGeometry& g, double ref_curl) { return ref_curl / detail::checked_det(g); }

/// Orientation factor of local function k: lowest-order and odd hierarchic
/// edge functions flip with the edge direction; cell functions never do.
inline int shape_sign(const RefShape& s, const CellEdges& ce) {
  if (s.kind == ShapeKind::LowestOrderEdge) return ce.sign[s.edge];
  if (s.kind == ShapeKind::HigherOrderEdge) return (s.i % 2 == 1) ? ce.sign[s.edge] : 1;
  return 1;
}

/// Global basis function = shape_factor * Piola(reference shape). Edge
/// functions also carry the edge length, so the lowest-order coefficient of a
/// field is its mean tangential value on the edge.
inline double shape_factor(const RefShape& s, const Mesh& mesh, const CellEdges& ce) {
  const double sign = shape_sign(s, ce);
  if (s.kind == ShapeKind::LowestOrderEdge || s.kind == ShapeKind::HigherOrderEdge)
    return sign * mesh.edge_length(ce.edge[s.edge]);
  return sign;
}

/// Numbering of the complex coefficients of one subdomain: edge dofs first
/// (ascending global edge, function index minor), then cell dofs.
struct DofMap {
  SubdomainPtr sub;
  BasisOrder order;
  std::vector<int> edges;
  std::unordered_map<int, int> edge_slot;
  std::unordered_map<int, int> cell_slot;
  int total_dofs = 0;

  int edge_dof(int global_edge, int k) const { return edge_slot.at(global_edge) * order.edge_functions() + k; }

  int cell_dof(int global_cell, int k) const {
    return static_cast<int>(edges.size()) * order.edge_functions() +
           cell_slot.at(global_cell) * order.cell_functions() + k;
  }

  /// Global dof of each local shape of `cell`, in local_shapes() order.
  std::vector<int> cell_dofs(int cell) const {
    std::vector<int> out;
    out.reserve(order.functions_per_cell());
    const auto& ce = sub->mesh->cell_edges[cell];
    for (int m = 0; m < 4; ++m)
      for (int k = 0; k < order.edge_functions(); ++k) out.push_back(edge_dof(ce.edge[m], k));
    for (int k = 0; k < order.cell_functions(); ++k) out.push_back(cell_dof(cell, k));
    return out;
  }
};

using DofMapPtr = std::shared_ptr<const DofMap>;

inline DofMapPtr distribute_dofs(const SubdomainPtr& sub, const BasisOrder& order) {
  order.validate();
  auto map = std::make_shared<DofMap>();
  map->sub = sub;
  map->order = order;
  std::vector<char> used(sub->mesh->edges.size(), 0);
  for (int c : sub->cells)
    for (int e : sub->mesh->cell_edges[c].edge) used[e] = 1;
  for (int e = 0; e < static_cast<int>(used.size()); ++e)
    if (used[e]) {
      map->edge_slot[e] = static_cast<int>(map->edges.size());
      map->edges.push_back(e);
    }
  for (std::size_t k = 0; k < sub->cells.size(); ++k) map->cell_slot[sub->cells[k]] = static_cast<int>(k);
  map->total_dofs = static_cast<int>(map->edges.size()) * order.edge_functions() +
                    static_cast<int>(sub->cells.size()) * order.cell_functions();
  return map;
}

/// Physical values and curls of all local shapes of one cell at one
/// reference point, orientation signs applied.
struct ShapeSample {
  std::vector<Vec2> value;
  std::vector<double> curl;
};

inline ShapeSample sample_shapes(const std::vector<RefShape>& shapes, const BasisOrder& order, const Mesh& mesh,
                                 int cell, Point2 ref) {
  const CellGeometry g = cell_geometry(mesh, cell);
  const CellEdges& ce = mesh.cell_edges[cell];
  ShapeSample s;
  s.value.resize(shapes.size());
  s.curl.resize(shapes.size());
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const double sign = shape_factor(shapes[k], mesh, ce);
    s.value[k] = sign * piola_map(g, ref_shape_value(shapes[k], order, ref));
    s.curl[k] = sign * piola_map_curl(g, ref_shape_curl(shapes[k], order, ref));
  }
  return s;
}

/// Reference-cell point on local edge m at parameter t in [0,1] measured from V_e1.
inline Point2 ref_edge_point(int m, double t) {
  switch (m) {
    case 0: return {0.0, t};
    case 1: return {1.0, t};
    case 2: return {t, 0.0};
    default: return {t, 1.0};
  }
}

}  // namespace nnddm
