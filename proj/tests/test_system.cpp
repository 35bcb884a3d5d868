#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "nnddm/quadrature.hpp"
#include "nnddm/system.hpp"

using namespace nnddm;

namespace {

ComplexSparseSystem dense_system(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
  ComplexSparseSystem s;
  s.matrix = a.sparseView();
  s.rhs = b;
  return s;
}

BoundaryField constant_field(cplx x, cplx y) {
  return {"const", [=](Point2) { return Vec2c{x, y}; }};
}

}  // namespace

TEST(SolveDirect, Identity) {
  const Eigen::VectorXcd r = Eigen::VectorXcd::LinSpaced(5, 1.0, 5.0);
  const auto x = solve_direct(dense_system(Eigen::MatrixXcd::Identity(5, 5), r));
  EXPECT_LT((x - r).norm(), 1e-15);
}

TEST(SolveDirect, TwoByTwoComplex) {
  const cplx I(0, 1);
  Eigen::MatrixXcd a(2, 2);
  a << 2.0, I, -I, 1.0;
  Eigen::VectorXcd b(2);
  b << 1.0, 0.0;
  const auto x = solve_direct(dense_system(a, b));
  EXPECT_LT(std::abs(x[0] - 1.0), 1e-14);
  EXPECT_LT(std::abs(x[1] - I), 1e-14);
}

TEST(SolveDirect, RandomSystemMatchesDenseElimination) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const int N = 50;
  Eigen::MatrixXcd a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = cplx(n(gen), n(gen));
  a += cplx(3.0 * N, 0.0) * Eigen::MatrixXcd::Identity(N, N);
  Eigen::VectorXcd b(N);
  for (int i = 0; i < N; ++i) b[i] = cplx(n(gen), n(gen));
  const Eigen::VectorXcd oracle = a.partialPivLu().solve(b);
  EXPECT_LT((solve_direct(dense_system(a, b)) - oracle).norm(), 1e-10);
}

TEST(SolveDirect, ConstraintsAreKeptAndEliminated) {
  Eigen::MatrixXcd a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  Eigen::VectorXcd b(3);
  b << 1, 2, 3;
  auto sys = dense_system(a, b);
  sys.constrained_dofs[2] = cplx(0.5, -1.0);
  const auto x = solve_direct(sys);
  EXPECT_EQ(x[2], cplx(0.5, -1.0));
  // rows 0 and 1 of A x = b hold with x2 fixed
  const Eigen::VectorXcd r = a * x - b;
  EXPECT_LT(std::abs(r[0]), 1e-14);
  EXPECT_LT(std::abs(r[1]), 1e-14);
}

TEST(SolveDirect, SingularMatrixReportsPivot) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3, 3);
  a(0, 0) = 1.0;
  a(2, 2) = 1.0;
  a(1, 0) = 1.0;  // column 1 is empty
  try {
    solve_direct(dense_system(a, Eigen::VectorXcd::Ones(3)));
    FAIL() << "expected FactorizationError";
  } catch (const FactorizationError& e) {
    EXPECT_GE(e.pivot(), 0);
    EXPECT_LT(e.pivot(), 3);
  }
}

TEST(Material, Defaults) {
  const MaterialParams p;
  EXPECT_DOUBLE_EQ(p.mu, 1.0);
  EXPECT_DOUBLE_EQ(p.kappa.real(), 1.49);
  EXPECT_DOUBLE_EQ(p.omega, 2 * std::numbers::pi / 3);
  EXPECT_NEAR(std::abs(p.robin() - cplx(0, 2 * std::numbers::pi / 3 * 1.49)), 0.0, 1e-15);
  MaterialParams bad;
  bad.omega = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  const auto d = distribute_dofs(whole_domain(build_mesh(2)), BasisOrder{});
  EXPECT_THROW(assemble_matrix(*d, bad), std::invalid_argument);
}

TEST(Projection, ConstantTangentialField) {
  const auto sub = whole_domain(build_mesh(4));
  const auto dofs = distribute_dofs(sub, BasisOrder{});
  const auto bottom = sub->edges_with(BoundaryKind::Incident);
  ASSERT_EQ(bottom.size(), 4u);
  const auto c = project_incident_trace(constant_field(1.0, 0.0), bottom, *dofs);
  for (int e : bottom) {
    EXPECT_NEAR(std::abs(c.at(dofs->edge_dof(e, 0)) - 1.0), 0.0, 1e-13);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(c.at(dofs->edge_dof(e, k))), 0.0, 1e-13);
  }
  const auto z = project_incident_trace(constant_field(0.0, 1.0), bottom, *dofs);
  for (const auto& [d, v] : z) EXPECT_NEAR(std::abs(v), 0.0, 1e-14);
}

// Independent oracle: on a bottom edge the trace basis is 1 and 2 P_{k}(2s-1),
// so the projection is a small least-squares problem in those polynomials.
TEST(Projection, GaussianBumpMatchesLeastSquaresOracle) {
  const int n = 32;
  const auto sub = whole_domain(build_mesh(n));
  const auto dofs = distribute_dofs(sub, BasisOrder{});
  const auto bottom = sub->edges_with(BoundaryKind::Incident);
  const BoundaryField bump{"bump", [](Point2 p) { return Vec2c{std::exp(-(p.x - 0.7) * (p.x - 0.7) / 0.008), 0.0}; }};
  const auto c = project_incident_trace(bump, bottom, *dofs);
  const auto rule = gauss_legendre(20);
  for (int e : bottom) {
    const double x0 = sub->mesh->vertices[sub->mesh->edges[e][0]].x;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    Eigen::VectorXd l = Eigen::VectorXd::Zero(4);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const double phi[4] = {1.0, 2 * legendre(1, 2 * s - 1), 2 * legendre(2, 2 * s - 1), 2 * legendre(3, 2 * s - 1)};
      const double x = x0 + s / n;
      const double f = std::exp(-(x - 0.7) * (x - 0.7) / 0.008);
      for (int a = 0; a < 4; ++a) {
        l[a] += rule.weights[q] * f * phi[a];
        for (int b = 0; b < 4; ++b) g(a, b) += rule.weights[q] * phi[a] * phi[b];
      }
    }
    const Eigen::VectorXd oracle = g.ldlt().solve(l);
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(c.at(dofs->edge_dof(e, k)).real(), oracle[k], 1e-10);
      EXPECT_EQ(c.at(dofs->edge_dof(e, k)).imag(), 0.0);
    }
  }
}

TEST(Assemble, HomogeneousData) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  const auto dofs = distribute_dofs(s0, BasisOrder{});
  const auto g = zero_trace(*s0, BasisOrder{}, 1, 0);
  const auto sys = assemble(*dofs, MaterialParams{}, zero_field(), &g);
  EXPECT_EQ(sys.rhs.norm(), 0.0);
  EXPECT_EQ(sys.constrained_dofs.size(), 4u * 4u);
  for (const auto& [d, v] : sys.constrained_dofs) EXPECT_EQ(v, cplx{});
  EXPECT_EQ(solve_direct(sys).norm(), 0.0);
}

TEST(Assemble, MatrixIsComplexSymmetric) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  const auto dofs = distribute_dofs(s1, BasisOrder{});
  const SparseMatrixC a = assemble_matrix(*dofs, MaterialParams{});
  const SparseMatrixC at = a.transpose();
  EXPECT_LT((a - at).norm(), 1e-12 * a.norm());
}

TEST(Assemble, InterfaceTraceLengthMismatch) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  const auto dofs = distribute_dofs(s0, BasisOrder{});
  const auto [t0, t1] = partition_two(build_mesh(8));
  const auto wrong = zero_trace(*t0, BasisOrder{}, 1, 0);
  EXPECT_THROW(interface_rhs(*dofs, &wrong), std::invalid_argument);
  EXPECT_THROW(interface_rhs(*dofs, nullptr), std::invalid_argument);
}

TEST(Assemble, InterfaceRhsIsMinusTraceMassTimesData) {
  const auto [s0, s1] = partition_two(build_mesh(2));
  const auto dofs = distribute_dofs(s0, BasisOrder{});
  auto g = zero_trace(*s0, BasisOrder{}, 1, 0);
  g.at(0, 0) = cplx(2.0, 1.0);
  const auto rhs = interface_rhs(*dofs, &g);
  // lowest-order trace is 1 along the edge, so the entry is -g * length
  EXPECT_NEAR(std::abs(rhs[dofs->edge_dof(g.edges[0], 0)] - cplx(-1.0, -0.5)), 0.0, 1e-14);
  // hierarchic traces are orthogonal to constants
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(rhs[dofs->edge_dof(g.edges[0], k)]), 0.0, 1e-14);
}

TEST(Monolithic, ZeroDataGivesZero) {
  const auto E = solve_monolithic(build_mesh(4), BasisOrder{}, MaterialParams{}, zero_field());
  EXPECT_EQ(E.coefficients.norm(), 0.0);
}

TEST(Monolithic, Deterministic) {
  const auto mesh = build_mesh(4);
  const auto bc = plane_wave(MaterialParams{}, 0.3);
  const auto a = solve_monolithic(mesh, BasisOrder{}, MaterialParams{}, bc);
  const auto b = solve_monolithic(mesh, BasisOrder{}, MaterialParams{}, bc);
  EXPECT_TRUE(a.coefficients == b.coefficients);
}

TEST(Monolithic, PlaneWaveErrorDecreases) {
  const MaterialParams p;
  const auto bc = plane_wave(p, 0.4);
  double prev = 1e300;
  for (int n : {2, 4, 8}) {
    const auto E = solve_monolithic(build_mesh(n), BasisOrder{}, p, bc, OuterBoundary::AllIncident);
    const double err = l2_error(E, bc);
    EXPECT_LT(err, prev / 8.0) << "n=" << n;
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(FEFunction, ValueAndCurlOfLowestOrderField) {
  const auto mesh = build_mesh(4);
  const auto dofs = distribute_dofs(whole_domain(mesh), BasisOrder{0, 0});
  FEFunction f = FEFunction::zero(dofs);
  // constant field (1, 0): unit coefficient on every horizontal edge
  for (int e = 0; e < static_cast<int>(mesh->edges.size()); ++e)
    if (std::abs(mesh->edge_tangent(e).x) > 0.5) f.coefficients[dofs->edge_dof(e, 0)] = 1.0;
  for (Point2 p : {Point2{0.1, 0.2}, Point2{0.55, 0.9}, Point2{0.999, 0.0}}) {
    const Vec2c v = f.value(p);
    EXPECT_NEAR(std::abs(v.x - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(v.y), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(f.curl(p)), 0.0, 1e-12);
  }
  EXPECT_NEAR(l2_norm(f), 1.0, 1e-13);
}
