#pragma once

// Discrete time-harmonic Maxwell problem on one subdomain: Galerkin assembly
// of the curl-curl / mass volume terms, the impedance terms on absorbing and
// interface edges, essential incident-trace constraints, and the sparse
// direct solve.

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnddm/errors.hpp"
#include "nnddm/geometry.hpp"
#include "nnddm/nedelec.hpp"
#include "nnddm/quadrature.hpp"

namespace nnddm {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct Vec2c {
  cplx x;
  cplx y;
};

struct MaterialParams {
  double mu = 1.0;
  cplx eps{1.49 * 1.49, 0.0};
  cplx kappa{1.49, 0.0};
  double lambda = 3.0;
  double omega = 2.0 * std::numbers::pi / 3.0;

  /// kappa = sqrt(eps), omega = 2 pi / lambda.
  static MaterialParams from_wavelength(double lambda, cplx eps = {1.49 * 1.49, 0.0}, double mu = 1.0) {
    MaterialParams p;
    p.mu = mu;
    p.eps = eps;
    p.kappa = std::sqrt(eps);
    p.lambda = lambda;
    p.omega = 2.0 * std::numbers::pi / lambda;
    return p;
  }

  static MaterialParams from_omega(double omega, cplx eps = {1.49 * 1.49, 0.0}, double mu = 1.0) {
    auto p = from_wavelength(2.0 * std::numbers::pi / omega, eps, mu);
    p.omega = omega;
    return p;
  }

  /// Robin coefficient shared by the absorbing and the transmission condition.
  cplx robin() const { return cplx(0.0, 1.0) * omega * kappa; }

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("MaterialParams: omega must be > 0");
    if (!(mu > 0.0)) throw std::invalid_argument("MaterialParams: mu must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("MaterialParams: lambda must be > 0");
  }
};

/// Closed-form incident field E^inc : (x, y) -> C^2.
struct BoundaryField {
  std::string id;
  std::function<Vec2c(Point2)> field;

  Vec2c operator()(Point2 p) const { return field(p); }
};

inline BoundaryField zero_field() {
  return {"zero", [](Point2) { return Vec2c{}; }};
}

/// E = p exp(i omega kappa d.x) with d = (cos a, sin a), p = (-sin a, cos a).
/// Solves the interior equation for real eps and mu = 1.
inline BoundaryField plane_wave(const MaterialParams& params, double angle) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  const cplx k = params.omega * params.kappa;
  return {"plane-wave", [=](Point2 p) {
            const cplx phase = std::exp(cplx(0.0, 1.0) * k * (dx * p.x + dy * p.y));
            return Vec2c{-dy * phase, dx * phase};
          }};
}

/// Tangential data on the interface edges of one subdomain pair: for every
/// edge (left to right) the coefficients of the edge's trace basis.
/// `from` produced it, `to` consumes it as Robin data.
struct InterfaceTrace {
  int from = 0;
  int to = 1;
  int functions_per_edge = 4;
  std::vector<int> edges;
  std::vector<Point2> midpoints;
  std::vector<cplx> values;

  std::size_t edge_count() const { return edges.size(); }
  cplx& at(std::size_t edge, int k) { return values[edge * functions_per_edge + k]; }
  cplx at(std::size_t edge, int k) const { return values[edge * functions_per_edge + k]; }
};

/// All-zero trace over the interface of `sub` addressed to `to`.
inline InterfaceTrace zero_trace(const Subdomain& sub, const BasisOrder& order, int from, int to) {
  InterfaceTrace g;
  g.from = from;
  g.to = to;
  g.functions_per_edge = order.edge_functions();
  g.edges = interface_edges(sub);
  for (int e : g.edges) g.midpoints.push_back(sub.mesh->edge_midpoint(e));
  g.values.assign(g.edges.size() * g.functions_per_edge, cplx{});
  return g;
}

struct ComplexSparseSystem {
  SparseMatrixC matrix;
  Eigen::VectorXcd rhs;
  std::map<int, cplx> constrained_dofs;
};

/// Discrete field on one subdomain.
struct FEFunction {
  DofMapPtr dofs;
  Eigen::VectorXcd coefficients;

  static FEFunction zero(const DofMapPtr& dofs) { return {dofs, Eigen::VectorXcd::Zero(dofs->total_dofs)}; }

  /// Field value at a physical point inside (or on the boundary of) the subdomain.
  Vec2c value(Point2 p) const { return value_in(dofs->sub->locate(p), p); }

  /// Field value using a given cell's restriction (for one-sided traces).
  Vec2c value_in(int cell, Point2 p) const {
    const Mesh& mesh = *dofs->sub->mesh;
    const CellGeometry g = cell_geometry(mesh, cell);
    const Point2 ref = g.inverse_map(p);
    const auto shapes = local_shapes(dofs->order);
    const auto idx = dofs->cell_dofs(cell);
    const auto& ce = mesh.cell_edges[cell];
    Vec2c out{};
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const Vec2 v = shape_factor(shapes[k], mesh, ce) *
                     piola_map(g, ref_shape_value(shapes[k], dofs->order, ref));
      out.x += coefficients[idx[k]] * v.x;
      out.y += coefficients[idx[k]] * v.y;
    }
    return out;
  }

  cplx curl(Point2 p) const {
    const int cell = dofs->sub->locate(p);
    const Mesh& mesh = *dofs->sub->mesh;
    const CellGeometry g = cell_geometry(mesh, cell);
    const Point2 ref = g.inverse_map(p);
    const auto shapes = local_shapes(dofs->order);
    const auto idx = dofs->cell_dofs(cell);
    const auto& ce = mesh.cell_edges[cell];
    cplx out{};
    for (std::size_t k = 0; k < shapes.size(); ++k)
      out += coefficients[idx[k]] * shape_factor(shapes[k], mesh, ce) *
             piola_map_curl(g, ref_shape_curl(shapes[k], dofs->order, ref));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Edge traces

/// Cell of the subdomain owning edge e, the local edge index and orientation.
struct EdgeFrame {
  int cell = -1;
  int local_edge = -1;
  int sign = 1;
};

inline EdgeFrame edge_frame(const DofMap& dofs, int edge) {
  const Mesh& mesh = *dofs.sub->mesh;
  for (int c : mesh.edge_cells[edge]) {
    if (c < 0 || !dofs.cell_slot.count(c)) continue;
    const auto& ce = mesh.cell_edges[c];
    for (int m = 0; m < 4; ++m)
      if (ce.edge[m] == edge) return {c, m, ce.sign[m]};
  }
  throw std::invalid_argument("edge " + std::to_string(edge) + " is not part of the subdomain");
}

/// Tangential traces (along the global edge direction) of the edge's basis
/// functions at parameter t in [0,1] from the edge's lower vertex.
inline std::vector<double> edge_trace_values(const DofMap& dofs, const EdgeFrame& f, double t) {
  const Mesh& mesh = *dofs.sub->mesh;
  const CellGeometry g = cell_geometry(mesh, f.cell);
  const int edge = mesh.cell_edges[f.cell].edge[f.local_edge];
  const Point2 tan = mesh.edge_tangent(edge);
  const Point2 ref = ref_edge_point(f.local_edge, f.sign > 0 ? t : 1.0 - t);
  const auto& ce = mesh.cell_edges[f.cell];
  std::vector<double> out(dofs.order.edge_functions());
  RefShape s{ShapeKind::LowestOrderEdge, f.local_edge, 0, 0};
  for (int k = 0; k < dofs.order.edge_functions(); ++k) {
    if (k > 0) s = {ShapeKind::HigherOrderEdge, f.local_edge, k - 1, 0};
    const Vec2 v = shape_factor(s, mesh, ce) * piola_map(g, ref_shape_value(s, dofs.order, ref));
    out[k] = v.x * tan.x + v.y * tan.y;
  }
  return out;
}

/// Gram matrix of the edge trace basis in L^2(edge).
inline Eigen::MatrixXd edge_trace_mass(const DofMap& dofs, int edge) {
  const int nf = dofs.order.edge_functions();
  const EdgeFrame f = edge_frame(dofs, edge);
  const double len = dofs.sub->mesh->edge_length(edge);
  const auto rule = gauss_legendre(dofs.order.quadrature_points());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nf, nf);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto tr = edge_trace_values(dofs, f, rule.points[q]);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) m(a, b) += rule.weights[q] * len * tr[a] * tr[b];
  }
  return m;
}

inline constexpr int kDataQuadraturePoints = 12;

/// Per-edge L^2 projection of the tangential component of `bc` onto the
/// edge's trace basis. Returns dof -> coefficient.
inline std::map<int, cplx> project_incident_trace(const BoundaryField& bc, const std::vector<int>& edges,
                                                  const DofMap& dofs) {
  std::map<int, cplx> out;
  const Mesh& mesh = *dofs.sub->mesh;
  const int nf = dofs.order.edge_functions();
  const auto rule = gauss_legendre(kDataQuadraturePoints);
  for (int e : edges) {
    const EdgeFrame f = edge_frame(dofs, e);
    const double len = mesh.edge_length(e);
    const Point2 a = mesh.vertices[mesh.edges[e][0]], b = mesh.vertices[mesh.edges[e][1]];
    const Point2 tan = mesh.edge_tangent(e);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nf, nf);
    Eigen::VectorXcd load = Eigen::VectorXcd::Zero(nf);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const double w = rule.weights[q] * len;
      const auto tr = edge_trace_values(dofs, f, t);
      const Vec2c ev = bc({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      const cplx et = ev.x * tan.x + ev.y * tan.y;
      for (int i = 0; i < nf; ++i) {
        load[i] += w * et * tr[i];
        for (int j = 0; j < nf; ++j) gram(i, j) += w * tr[i] * tr[j];
      }
    }
    const Eigen::VectorXcd c = gram.cast<cplx>().ldlt().solve(load);
    for (int k = 0; k < nf; ++k) out[dofs.edge_dof(e, k)] = c[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

namespace detail {

struct RefTables {
  QuadratureRule rule;
  std::vector<RefShape> shapes;
  // [q][k] over the tensor points q = qy * n + qx
  std::vector<std::vector<Vec2>> value;
  std::vector<std::vector<double>> curl;
  std::vector<Point2> points;
  std::vector<double> weights;
};

inline RefTables reference_tables(const BasisOrder& order, int points_per_direction) {
  RefTables t;
  t.rule = gauss_legendre(points_per_direction);
  t.shapes = local_shapes(order);
  for (std::size_t qy = 0; qy < t.rule.points.size(); ++qy)
    for (std::size_t qx = 0; qx < t.rule.points.size(); ++qx) {
      const Point2 p{t.rule.points[qx], t.rule.points[qy]};
      t.points.push_back(p);
      t.weights.push_back(t.rule.weights[qx] * t.rule.weights[qy]);
      std::vector<Vec2> v(t.shapes.size());
      std::vector<double> c(t.shapes.size());
      for (std::size_t k = 0; k < t.shapes.size(); ++k) {
        v[k] = ref_shape_value(t.shapes[k], order, p);
        c[k] = ref_shape_curl(t.shapes[k], order, p);
      }
      t.value.push_back(std::move(v));
      t.curl.push_back(std::move(c));
    }
  return t;
}

}  // namespace detail

/// Sparse matrix of the subdomain bilinear form (no constraints applied).
/// `quadrature_points` overrides the per-direction Gauss count.
inline SparseMatrixC assemble_matrix(const DofMap& dofs, const MaterialParams& params,
                                     std::optional<int> quadrature_points = std::nullopt) {
  params.validate();
  const Subdomain& sub = *dofs.sub;
  const Mesh& mesh = *sub.mesh;
  const BasisOrder& order = dofs.order;
  const int nq = quadrature_points.value_or(order.quadrature_points());
  const auto tab = detail::reference_tables(order, nq);
  const auto edge_rule = gauss_legendre(nq);
  const int nloc = order.functions_per_cell();
  const cplx mass_coeff = params.eps * params.omega * params.omega;
  const cplx robin = params.robin();

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(sub.cells.size() * nloc * nloc);
  Eigen::MatrixXd stiff(nloc, nloc), mass(nloc, nloc), bmass(nloc, nloc);
  std::vector<Vec2> val(nloc);
  std::vector<double> crl(nloc);
  std::vector<double> tr(nloc);

  for (int c : sub.cells) {
    const CellGeometry g = cell_geometry(mesh, c);
    const double det = std::abs(g.det());
    const auto& ce = mesh.cell_edges[c];
    std::vector<double> sign(nloc);
    for (int k = 0; k < nloc; ++k) sign[k] = shape_factor(tab.shapes[k], mesh, ce);
    stiff.setZero();
    mass.setZero();
    for (std::size_t q = 0; q < tab.points.size(); ++q) {
      const double w = tab.weights[q] * det;
      for (int k = 0; k < nloc; ++k) {
        val[k] = sign[k] * piola_map(g, tab.value[q][k]);
        crl[k] = sign[k] * piola_map_curl(g, tab.curl[q][k]);
      }
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) {
          stiff(a, b) += w * crl[a] * crl[b];
          mass(a, b) += w * dot(val[a], val[b]);
        }
    }
    // impedance terms on absorbing and interface edges of this cell
    bmass.setZero();
    bool has_boundary = false;
    for (int m = 0; m < 4; ++m) {
      const auto it = sub.boundary_tags.find(ce.edge[m]);
      if (it == sub.boundary_tags.end() || it->second.kind == BoundaryKind::Incident) continue;
      has_boundary = true;
      const Point2 tan = mesh.edge_tangent(ce.edge[m]);
      const double len = mesh.edge_length(ce.edge[m]);
      for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
        const Point2 ref = ref_edge_point(m, edge_rule.points[q]);
        for (int k = 0; k < nloc; ++k) {
          const Vec2 v = sign[k] * piola_map(g, ref_shape_value(tab.shapes[k], order, ref));
          tr[k] = v.x * tan.x + v.y * tan.y;
        }
        const double w = edge_rule.weights[q] * len;
        for (int a = 0; a < nloc; ++a)
          for (int b = 0; b < nloc; ++b) bmass(a, b) += w * tr[a] * tr[b];
      }
    }
    const auto idx = dofs.cell_dofs(c);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        cplx v = stiff(a, b) / params.mu - mass_coeff * mass(a, b);
        if (has_boundary) v += robin * bmass(a, b);
        if (v != cplx{}) triplets.emplace_back(idx[a], idx[b], v);
      }
  }
  SparseMatrixC a(dofs.total_dofs, dofs.total_dofs);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

/// Looks up the value block of `g` for each interface edge of `sub` by
/// midpoint matching; throws on any mismatch.
inline std::vector<int> align_trace(const InterfaceTrace& g, const Subdomain& sub, const std::vector<int>& edges) {
  if (g.edges.size() != edges.size())
    throw std::invalid_argument("interface trace has " + std::to_string(g.edges.size()) + " edges, subdomain has " +
                                std::to_string(edges.size()));
  std::vector<int> slot(edges.size(), -1);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Point2 m = sub.mesh->edge_midpoint(edges[k]);
    for (std::size_t s = 0; s < g.midpoints.size(); ++s)
      if (std::abs(g.midpoints[s].x - m.x) < detail::kGeomTol && std::abs(g.midpoints[s].y - m.y) < detail::kGeomTol) {
        slot[k] = static_cast<int>(s);
        break;
      }
    if (slot[k] < 0) throw std::invalid_argument("interface trace does not cover edge " + std::to_string(edges[k]));
  }
  return slot;
}

/// Right-hand side contributed by Robin data g on the interface:
/// b = -int_Sigma g . gamma_T(phi).
inline Eigen::VectorXcd interface_rhs(const DofMap& dofs, const InterfaceTrace* g_in) {
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dofs.total_dofs);
  const auto edges = interface_edges(*dofs.sub);
  if (edges.empty()) return rhs;
  if (g_in == nullptr) throw std::invalid_argument("subdomain has interface edges but no interface trace was given");
  if (g_in->functions_per_edge != dofs.order.edge_functions())
    throw std::invalid_argument("interface trace block size does not match the basis order");
  const auto slot = align_trace(*g_in, *dofs.sub, edges);
  const int nf = dofs.order.edge_functions();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Eigen::MatrixXd m = edge_trace_mass(dofs, edges[k]);
    Eigen::VectorXcd gv(nf);
    for (int i = 0; i < nf; ++i) gv[i] = g_in->at(slot[k], i);
    const Eigen::VectorXcd contrib = -(m.cast<cplx>() * gv);
    for (int i = 0; i < nf; ++i) rhs[dofs.edge_dof(edges[k], i)] += contrib[i];
  }
  return rhs;
}

inline ComplexSparseSystem assemble(const DofMap& dofs, const MaterialParams& params, const BoundaryField& bc,
                                    const InterfaceTrace* g_in) {
  ComplexSparseSystem sys;
  sys.matrix = assemble_matrix(dofs, params);
  sys.rhs = interface_rhs(dofs, g_in);
  sys.constrained_dofs = project_incident_trace(bc, dofs.sub->edges_with(BoundaryKind::Incident), dofs);
  return sys;
}

// ---------------------------------------------------------------------------
// Direct solve with constraint elimination

/// LU factorization of the free-free block; reusable across right-hand sides
/// and constraint values that share the constrained index set.
class ReducedSolver {
 public:
  ReducedSolver(const SparseMatrixC& matrix, const std::vector<int>& constrained) : n_(matrix.rows()) {
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("system matrix must be square");
    free_of_.assign(n_, -1);
    std::vector<char> is_fixed(n_, 0);
    for (int d : constrained) {
      if (d < 0 || d >= n_) throw std::invalid_argument("constrained dof out of range");
      is_fixed[d] = 1;
    }
    fixed_of_.assign(n_, -1);
    for (int i = 0; i < n_; ++i) {
      if (is_fixed[i]) {
        fixed_of_[i] = static_cast<int>(fixed_.size());
        fixed_.push_back(i);
      } else {
        free_of_[i] = static_cast<int>(free_.size());
        free_.push_back(i);
      }
    }
    std::vector<Eigen::Triplet<cplx>> tff, tfc;
    for (int r = 0; r < n_; ++r) {
      if (is_fixed[r]) continue;
      for (SparseMatrixC::InnerIterator it(matrix, r); it; ++it) {
        const int c = static_cast<int>(it.col());
        if (is_fixed[c])
          tfc.emplace_back(free_of_[r], fixed_of_[c], it.value());
        else
          tff.emplace_back(free_of_[r], free_of_[c], it.value());
      }
    }
    Eigen::SparseMatrix<cplx> aff(free_.size(), free_.size());
    aff.setFromTriplets(tff.begin(), tff.end());
    aff.makeCompressed();
    afc_.resize(free_.size(), fixed_.size());
    afc_.setFromTriplets(tfc.begin(), tfc.end());
    if (!free_.empty()) {
      lu_.analyzePattern(aff);
      lu_.factorize(aff);
      if (lu_.info() != Eigen::Success) {
        const std::string msg = lu_.lastErrorMessage();
        long pivot = -1;
        const auto pos = msg.find("ZERO COLUMN AT ");
        if (pos != std::string::npos) pivot = std::stol(msg.substr(pos + 15)) - 1;
        throw FactorizationError("sparse LU failed: zero pivot at column " + std::to_string(pivot), pivot);
      }
    }
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs, const std::map<int, cplx>& values) const {
    if (rhs.size() != n_) throw std::invalid_argument("rhs length does not match the system");
    Eigen::VectorXcd xc = Eigen::VectorXcd::Zero(fixed_.size());
    for (const auto& [d, v] : values) {
      if (d < 0 || d >= n_ || fixed_of_[d] < 0) throw std::invalid_argument("value given for an unconstrained dof");
      xc[fixed_of_[d]] = v;
    }
    Eigen::VectorXcd bf(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) bf[k] = rhs[free_[k]];
    bf -= afc_ * xc;
    Eigen::VectorXcd x(n_);
    if (!free_.empty()) {
      const Eigen::VectorXcd xf = lu_.solve(bf);
      for (std::size_t k = 0; k < free_.size(); ++k) x[free_[k]] = xf[k];
    }
    for (std::size_t k = 0; k < fixed_.size(); ++k) x[fixed_[k]] = xc[k];
    return x;
  }

  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_;
  std::vector<int> free_, fixed_, free_of_, fixed_of_;
  Eigen::SparseMatrix<cplx> afc_;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu_;
};

inline std::vector<int> constrained_indices(const std::map<int, cplx>& values) {
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& kv : values) out.push_back(kv.first);
  return out;
}

/// Solves the constrained system; constrained dofs keep exactly their values.
inline Eigen::VectorXcd solve_direct(const ComplexSparseSystem& sys) {
  if (sys.rhs.size() != sys.matrix.rows()) throw std::invalid_argument("rhs length does not match the system");
  const ReducedSolver solver(sys.matrix, constrained_indices(sys.constrained_dofs));
  return solver.solve(sys.rhs, sys.constrained_dofs);
}

/// Factor-once solver for one subdomain and parameter set.
class SubdomainSolver {
 public:
  SubdomainSolver(DofMapPtr dofs, const MaterialParams& params)
      : dofs_(std::move(dofs)),
        params_(params),
        incident_edges_(dofs_->sub->edges_with(BoundaryKind::Incident)),
        solver_(assemble_matrix(*dofs_, params), incident_dofs()) {}

  FEFunction solve(const BoundaryField& bc, const InterfaceTrace* g_in) const {
    const auto values = project_incident_trace(bc, incident_edges_, *dofs_);
    return {dofs_, solver_.solve(interface_rhs(*dofs_, g_in), values)};
  }

  const DofMapPtr& dofs() const { return dofs_; }
  const MaterialParams& params() const { return params_; }

 private:
  std::vector<int> incident_dofs() const {
    std::vector<int> out;
    for (int e : incident_edges_)
      for (int k = 0; k < dofs_->order.edge_functions(); ++k) out.push_back(dofs_->edge_dof(e, k));
    return out;
  }

  DofMapPtr dofs_;
  MaterialParams params_;
  std::vector<int> incident_edges_;
  ReducedSolver solver_;
};

/// Single-domain solve of the weak form, the reference for the DDM.
inline FEFunction solve_monolithic(const MeshPtr& mesh, const BasisOrder& order, const MaterialParams& params,
                                   const BoundaryField& bc, OuterBoundary policy = OuterBoundary::Standard) {
  const auto dofs = distribute_dofs(whole_domain(mesh, policy), order);
  const auto sys = assemble(*dofs, params, bc, nullptr);
  return {dofs, solve_direct(sys)};
}

// ---------------------------------------------------------------------------
// Norms

/// sqrt(sum over cells of int |f(x)|^2) with a tensor Gauss rule on each cell.
template <class F>
double cell_l2_norm(const Subdomain& sub, F&& f, int points_per_direction = 8) {
  const auto rule = gauss_legendre(points_per_direction);
  const Mesh& mesh = *sub.mesh;
  double acc = 0.0;
  for (int c : sub.cells) {
    const CellGeometry g = cell_geometry(mesh, c);
    const double det = std::abs(g.det());
    for (std::size_t qy = 0; qy < rule.points.size(); ++qy)
      for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
        const Point2 p = g.map({rule.points[qx], rule.points[qy]});
        const Vec2c v = f(c, p);
        acc += rule.weights[qx] * rule.weights[qy] * det * (std::norm(v.x) + std::norm(v.y));
      }
  }
  return std::sqrt(acc);
}

inline double l2_norm(const FEFunction& u) {
  return cell_l2_norm(*u.dofs->sub, [&](int c, Point2 p) { return u.value_in(c, p); });
}

/// ||u - exact|| over u's subdomain.
inline double l2_error(const FEFunction& u, const BoundaryField& exact) {
  return cell_l2_norm(*u.dofs->sub, [&](int c, Point2 p) {
    const Vec2c a = u.value_in(c, p), b = exact(p);
    return Vec2c{a.x - b.x, a.y - b.y};
  });
}

/// ||u - v|| over u's subdomain; v may live on a larger subdomain of the same mesh.
inline double l2_difference(const FEFunction& u, const FEFunction& v) {
  return cell_l2_norm(*u.dofs->sub, [&](int c, Point2 p) {
    const Vec2c a = u.value_in(c, p), b = v.value_in(c, p);
    return Vec2c{a.x - b.x, a.y - b.y};
  });
}

}  // namespace nnddm
