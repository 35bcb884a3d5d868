#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nnddm/ddm.hpp"

using namespace nnddm;

namespace {

FEFunction restrict_to(const FEFunction& whole, const SubdomainPtr& sub) {
  FEFunction f = FEFunction::zero(distribute_dofs(sub, whole.dofs->order));
  for (int c : sub->cells) {
    const auto dst = f.dofs->cell_dofs(c), src = whole.dofs->cell_dofs(c);
    for (std::size_t k = 0; k < dst.size(); ++k) f.coefficients[dst[k]] = whole.coefficients[src[k]];
  }
  return f;
}

}  // namespace

TEST(Trace, ZeroField) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  const auto t = extract_tangential_trace(FEFunction::zero(distribute_dofs(s0, BasisOrder{})), *s0);
  EXPECT_EQ(t.edge_count(), 4u);
  for (auto v : t.values) EXPECT_EQ(v, cplx{});
}

TEST(Trace, SingleDof) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  FEFunction E = FEFunction::zero(distribute_dofs(s0, BasisOrder{}));
  const auto edges = interface_edges(*s0);
  E.coefficients[E.dofs->edge_dof(edges[2], 0)] = 1.0;
  const auto t = extract_tangential_trace(E, *s0);
  for (std::size_t k = 0; k < t.edge_count(); ++k)
    for (int i = 0; i < 4; ++i) EXPECT_EQ(t.at(k, i), (k == 2 && i == 0) ? cplx(1.0) : cplx{});
}

TEST(Trace, MonolithicPlaneWaveMatchesProjection) {
  const MaterialParams p;
  const auto mesh = build_mesh(16);
  const auto bc = plane_wave(p, 0.9);
  const auto whole = solve_monolithic(mesh, BasisOrder{}, p, bc, OuterBoundary::AllIncident);
  const auto [s0, s1] = partition_two(mesh);
  const auto E0 = restrict_to(whole, s0);
  const auto t = extract_tangential_trace(E0, *s0);
  const auto proj = project_incident_trace(bc, t.edges, *E0.dofs);
  for (std::size_t k = 0; k < t.edge_count(); ++k)
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(t.at(k, i) - proj.at(E0.dofs->edge_dof(t.edges[k], i))), 1e-8);
}

TEST(Update, UnitTraceGivesMinusTwoC) {
  const MaterialParams p;
  const auto [s0, s1] = partition_two(build_mesh(4));
  FEFunction E = FEFunction::zero(distribute_dofs(s0, BasisOrder{}));
  const auto edges = interface_edges(*s0);
  E.coefficients[E.dofs->edge_dof(edges[1], 0)] = 1.0;
  const auto g = update_trace(zero_trace(*s0, BasisOrder{}, 1, 0), E, p);
  EXPECT_EQ(g.from, 0);
  EXPECT_EQ(g.to, 1);
  EXPECT_NEAR(g.at(1, 0).real(), 0.0, 1e-15);
  EXPECT_NEAR(g.at(1, 0).imag(), -2.0 * (2.0 * std::numbers::pi / 3.0) * 1.49, 1e-13);
  EXPECT_NEAR(g.at(1, 0).imag(), -6.2413, 1e-4);
  EXPECT_EQ(g.at(0, 0), cplx{});
}

TEST(Update, ZeroFieldNegatesData) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  auto g = zero_trace(*s1, BasisOrder{}, 0, 1);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = cplx(0.1 * i, -0.2 * i);
  const auto out = update_trace(g, FEFunction::zero(distribute_dofs(s1, BasisOrder{})), MaterialParams{});
  for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_EQ(out.values[i], -g.values[i]);
}

TEST(Update, EdgeCountMismatch) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  const auto [t0, t1] = partition_two(build_mesh(8));
  EXPECT_THROW(update_trace(zero_trace(*t0, BasisOrder{}, 1, 0), FEFunction::zero(distribute_dofs(s0, BasisOrder{})),
                            MaterialParams{}),
               std::invalid_argument);
}

TEST(DDM, HomogeneousProblem) {
  const auto h = DDMSolver(build_mesh(4), BasisOrder{}, MaterialParams{}).run(zero_field(), 3);
  ASSERT_EQ(h.steps.size(), 4u);
  for (const auto& s : h.steps) {
    EXPECT_EQ(s.E0.coefficients.norm(), 0.0);
    EXPECT_EQ(s.E1.coefficients.norm(), 0.0);
    for (auto v : s.g01.values) EXPECT_EQ(v, cplx{});
    EXPECT_EQ(s.residual, 0.0);
  }
  EXPECT_THROW(ddm_run(partition_two(build_mesh(4)), BasisOrder{}, MaterialParams{}, zero_field(), 0),
               std::invalid_argument);
}

TEST(DDM, StepIndexing) {
  const MaterialParams p;
  const DDMSolver ddm(build_mesh(4), BasisOrder{}, p);
  const auto bc = plane_wave(p, 1.2);
  const auto h = ddm.run(bc, 3);
  ASSERT_EQ(h.steps.size(), 4u);
  for (int k = 1; k <= 3; ++k) {
    const auto& prev = h.steps[k - 1];
    const auto& s = h.steps[k];
    EXPECT_EQ(s.k, k);
    const auto E0 = ddm.solver(0).solve(bc, &prev.g10);
    EXPECT_TRUE(E0.coefficients == s.E0.coefficients);
    const auto g01 = update_trace(prev.g10, s.E0, p);
    EXPECT_TRUE(g01.values == s.g01.values);
    EXPECT_TRUE(std::isfinite(s.residual));
  }
  // nothing is incident on the top half, so it stays dark in the first step
  EXPECT_EQ(h.steps[1].E1.coefficients.norm(), 0.0);
}

TEST(DDM, ConvergesToMonolithicSolution) {
  const MaterialParams p;
  const auto mesh = build_mesh(8);
  const BoundaryField bc{"bump", [](Point2 q) { return Vec2c{std::exp(-(q.x - 0.4) * (q.x - 0.4) / 0.02), 0.5}; }};
  const auto h = DDMSolver(mesh, BasisOrder{}, p).run(bc, 60);
  const auto mono = solve_monolithic(mesh, BasisOrder{}, p, bc);
  auto rel = [&](int k) {
    return std::hypot(l2_difference(h.steps[k].E0, mono), l2_difference(h.steps[k].E1, mono)) / l2_norm(mono);
  };
  double prev = rel(1);
  for (int k : {2, 3, 4, 6, 10, 20, 40, 60}) {
    EXPECT_LT(rel(k), prev) << "step " << k;
    prev = rel(k);
  }
  // the plain Robin exchange converges slowly; the error still falls well below the first sweep
  EXPECT_LT(rel(60), 1e-3);
  EXPECT_LT(rel(60), rel(6) / 10);
  EXPECT_LT(interface_jump(h.last().E0, h.last().E1), interface_jump(h.steps[6].E0, h.steps[6].E1) / 10);
}

TEST(DDM, ResidualToleranceStopsEarly) {
  const MaterialParams p;
  const auto h = DDMSolver(build_mesh(4), BasisOrder{}, p).run(plane_wave(p, 1.0), 200, 1e-2);
  EXPECT_LT(h.last().residual, 1e-2);
  EXPECT_GE(h.steps[h.steps.size() - 2].residual, 1e-2);
  EXPECT_LT(h.steps.size(), 201u);
}

TEST(Jump, SameMonolithicFieldHasNoJump) {
  const MaterialParams p;
  const auto mesh = build_mesh(8);
  const auto whole = solve_monolithic(mesh, BasisOrder{}, p, plane_wave(p, 0.7));
  const auto [s0, s1] = partition_two(mesh);
  EXPECT_LT(interface_jump(restrict_to(whole, s0), restrict_to(whole, s1)), 1e-10);
}

TEST(Jump, UnitLowestOrderTrace) {
  const auto [s0, s1] = partition_two(build_mesh(4));
  FEFunction E1 = FEFunction::zero(distribute_dofs(s1, BasisOrder{}));
  for (int e : interface_edges(*s1)) E1.coefficients[E1.dofs->edge_dof(e, 0)] = 1.0;
  // tangential trace is 1 along the whole interface of length 1
  EXPECT_NEAR(interface_jump(FEFunction::zero(distribute_dofs(s0, BasisOrder{})), E1), 1.0, 1e-13);
}

TEST(History, CsvLayout) {
  const MaterialParams p;
  const auto h = DDMSolver(build_mesh(2), BasisOrder{}, p).run(plane_wave(p, 1.0), 2);
  std::ostringstream os;
  write_history_csv(os, h);
  std::istringstream is(os.str());
  std::string comment, header, row;
  std::getline(is, comment);
  std::getline(is, header);
  EXPECT_EQ(comment[0], '#');
  EXPECT_EQ(header.rfind("step,residual,g01_e0_0_re,g01_e0_0_im,", 0), 0u);
  // 2 edges x 4 functions x 2 directions x (re, im)
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 1 + 32);
  int rows = 0;
  while (std::getline(is, row)) ++rows;
  EXPECT_EQ(rows, 3);
}
