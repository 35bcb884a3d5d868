#pragma once

// Two-subdomain non-overlapping Schwarz iteration with Robin transmission
// conditions and the identity interface operator.

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnddm/geometry.hpp"
#include "nnddm/nedelec.hpp"
#include "nnddm/quadrature.hpp"
#include "nnddm/system.hpp"

namespace nnddm {

/// Interface-edge dof coefficients of E, ordered left to right. Since the
/// edge dofs are the coefficients of the trace basis, this is the discrete
/// tangential trace.
inline InterfaceTrace extract_tangential_trace(const FEFunction& E, const Subdomain& sub) {
  if (E.dofs->sub.get() != &sub && E.dofs->sub->id != sub.id)
    throw std::invalid_argument("extract_tangential_trace: field lives on another subdomain");
  const auto edges = interface_edges(sub);
  const int neighbor = edges.empty() ? -1 : sub.boundary_tags.at(edges.front()).neighbor;
  InterfaceTrace t = zero_trace(sub, E.dofs->order, sub.id, neighbor);
  for (std::size_t k = 0; k < edges.size(); ++k)
    for (int i = 0; i < t.functions_per_edge; ++i) t.at(k, i) = E.coefficients[E.dofs->edge_dof(edges[k], i)];
  return t;
}

/// Robin data for the neighbor of subdomain i: g_ji = -g_ij - 2 c gamma_T(E_i),
/// c = i omega kappa. `g_in` is the data subdomain i consumed.
inline InterfaceTrace update_trace(const InterfaceTrace& g_in, const FEFunction& E_i, const MaterialParams& params) {
  const Subdomain& sub = *E_i.dofs->sub;
  const InterfaceTrace trace = extract_tangential_trace(E_i, sub);
  if (g_in.edge_count() != trace.edge_count())
    throw std::invalid_argument("update_trace: trace has " + std::to_string(g_in.edge_count()) +
                                " edges, subdomain interface has " + std::to_string(trace.edge_count()));
  if (g_in.functions_per_edge != trace.functions_per_edge)
    throw std::invalid_argument("update_trace: block size mismatch");
  const auto slot = align_trace(g_in, sub, trace.edges);
  const cplx two_c = 2.0 * params.robin();
  InterfaceTrace out = trace;
  out.from = sub.id;
  out.to = trace.to;
  for (std::size_t k = 0; k < trace.edge_count(); ++k)
    for (int i = 0; i < trace.functions_per_edge; ++i)
      out.at(k, i) = -g_in.at(slot[k], i) - two_c * trace.at(k, i);
  return out;
}

/// L^2(Sigma) norm of the difference of the two one-sided tangential traces.
inline double interface_jump(const FEFunction& E0, const FEFunction& E1, int points_per_edge = 8) {
  const Subdomain& s0 = *E0.dofs->sub;
  const Mesh& mesh = *s0.mesh;
  const auto rule = gauss_legendre(points_per_edge);
  auto side_cell = [&](const DofMap& d, int e) {
    for (int c : mesh.edge_cells[e])
      if (c >= 0 && d.cell_slot.count(c)) return c;
    throw std::invalid_argument("interface_jump: edge not adjacent to subdomain");
  };
  double acc = 0.0;
  for (int e : interface_edges(s0)) {
    const int c0 = side_cell(*E0.dofs, e), c1 = side_cell(*E1.dofs, e);
    const Point2 a = mesh.vertices[mesh.edges[e][0]], b = mesh.vertices[mesh.edges[e][1]];
    const Point2 t = mesh.edge_tangent(e);
    const double len = mesh.edge_length(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Point2 p{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
      const Vec2c u = E0.value_in(c0, p), v = E1.value_in(c1, p);
      const cplx d = (u.x - v.x) * t.x + (u.y - v.y) * t.y;
      acc += rule.weights[q] * len * std::norm(d);
    }
  }
  return std::sqrt(acc);
}

struct DDMStep {
  int k = 0;
  FEFunction E0, E1;
  InterfaceTrace g01;  // produced by subdomain 0, consumed by 1
  InterfaceTrace g10;  // produced by subdomain 1, consumed by 0
  double residual = 0.0;  // ||g^k - g^(k-1)||_2 over both directions, k >= 1
};

/// Step 0 holds g^0 = 0 and zero fields; step k holds E^k (solved with
/// g^(k-1)) and g^k.
struct DDMHistory {
  std::vector<DDMStep> steps;

  const DDMStep& last() const { return steps.back(); }
};

inline double trace_distance_sq(const InterfaceTrace& a, const InterfaceTrace& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::norm(a.values[i] - b.values[i]);
  return acc;
}

/// Both subdomain solvers for one parameter set; factorizations are reused
/// across steps and boundary fields.
class DDMSolver {
 public:
  DDMSolver(const MeshPtr& mesh, const BasisOrder& order, const MaterialParams& params)
      : DDMSolver(partition_two(mesh), order, params) {}

  DDMSolver(std::pair<SubdomainPtr, SubdomainPtr> subs, const BasisOrder& order, const MaterialParams& params)
      : order_(order),
        params_(params),
        s0_(distribute_dofs(subs.first, order), params),
        s1_(distribute_dofs(subs.second, order), params) {}

  const SubdomainSolver& solver(int i) const { return i == 0 ? s0_ : s1_; }
  const BasisOrder& order() const { return order_; }
  const MaterialParams& params() const { return params_; }
  const Subdomain& subdomain(int i) const { return *solver(i).dofs()->sub; }

  InterfaceTrace zero_data_for(int i) const { return zero_trace(subdomain(i), order_, 1 - i, i); }

  /// Runs k_steps iterations; with `residual_tol` set, stops once r^k < tol.
  DDMHistory run(const BoundaryField& bc, int k_steps, std::optional<double> residual_tol = std::nullopt) const {
    if (k_steps < 1) throw std::invalid_argument("ddm_run: k_steps must be >= 1");
    DDMHistory h;
    DDMStep s0;
    s0.E0 = FEFunction::zero(s0_.dofs());
    s0.E1 = FEFunction::zero(s1_.dofs());
    s0.g10 = zero_data_for(0);
    s0.g01 = zero_data_for(1);
    h.steps.push_back(std::move(s0));
    for (int k = 1; k <= k_steps; ++k) {
      const DDMStep& prev = h.steps.back();
      DDMStep s;
      s.k = k;
      s.E0 = solve_annotated(0, bc, prev.g10, k);
      s.E1 = solve_annotated(1, bc, prev.g01, k);
      s.g01 = update_trace(prev.g10, s.E0, params_);
      s.g10 = update_trace(prev.g01, s.E1, params_);
      s.residual = std::sqrt(trace_distance_sq(s.g01, prev.g01) + trace_distance_sq(s.g10, prev.g10));
      const bool stop = residual_tol && s.residual < *residual_tol;
      h.steps.push_back(std::move(s));
      if (stop) break;
    }
    return h;
  }

 private:
  FEFunction solve_annotated(int i, const BoundaryField& bc, const InterfaceTrace& g, int k) const {
    try {
      return solver(i).solve(bc, &g);
    } catch (const FactorizationError& e) {
      throw FactorizationError("step " + std::to_string(k) + ", subdomain " + std::to_string(i) + ": " + e.what(),
                               e.pivot());
    } catch (const std::exception& e) {
      throw std::runtime_error("step " + std::to_string(k) + ", subdomain " + std::to_string(i) + ": " + e.what());
    }
  }

  BasisOrder order_;
  MaterialParams params_;
  SubdomainSolver s0_, s1_;
};

inline DDMHistory ddm_run(std::pair<SubdomainPtr, SubdomainPtr> subs, const BasisOrder& order,
                          const MaterialParams& params, const BoundaryField& bc, int k_steps) {
  if (k_steps < 1) throw std::invalid_argument("ddm_run: k_steps must be >= 1");
  return DDMSolver(std::move(subs), order, params).run(bc, k_steps);
}

/// History CSV: step,residual then re/im of every g01 and g10 coefficient.
inline void write_history_csv(std::ostream& os, const DDMHistory& h) {
  if (h.steps.empty()) return;
  const auto& first = h.steps.front();
  os << "# residual = ||g^k - g^(k-1)||_2 over both directions; g01_e<edge>_<dof> is data for subdomain 1\n";
  os << "step,residual";
  for (const auto* g : {&first.g01, &first.g10})
    for (std::size_t e = 0; e < g->edge_count(); ++e)
      for (int i = 0; i < g->functions_per_edge; ++i) {
        const std::string name = std::string(g == &first.g01 ? "g01" : "g10") + "_e" + std::to_string(e) + "_" +
                                 std::to_string(i);
        os << ',' << name << "_re," << name << "_im";
      }
  os << '\n' << std::setprecision(17);
  for (const auto& s : h.steps) {
    os << s.k << ',' << s.residual;
    for (const auto* g : {&s.g01, &s.g10})
      for (const auto& v : g->values) os << ',' << v.real() << ',' << v.imag();
    os << '\n';
  }
}

}  // namespace nnddm
