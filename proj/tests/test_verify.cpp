#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hmdg/errors.hpp"
#include "hmdg/manufactured.hpp"
#include "hmdg/verify.hpp"

using namespace hmdg;
using Eigen::Vector2d;

namespace {

std::shared_ptr<const Mesh> unit_mesh(int nx) { return std::make_shared<const Mesh>(build_structured_mesh(nx)); }

// Central differences with step e; error O(e^2).
double ddx(const std::function<double(const Vector2d&)>& f, const Vector2d& x, int axis, double e = 1e-5) {
  Vector2d a = x, b = x;
  a[axis] += e;
  b[axis] -= e;
  return (f(a) - f(b)) / (2.0 * e);
}

std::vector<Vector2d> interior_samples(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.02, 0.98);
  std::vector<Vector2d> out;
  for (int i = 0; i < n; ++i) out.emplace_back(d(rng), d(rng));
  return out;
}

}  // namespace

TEST(CosineCase, VelocityIsDarcyLaw) {
  const ManufacturedCase mc = cosine_case();
  for (const Vector2d& x : interior_samples(50, 1)) {
    const double t = 0.07;
    const Vector2d u = -mc.grad_p(x, t) / mobility(mc.c(x, t), mc.spec, x);
    EXPECT_LE((mc.u(x, t) - u).norm(), 1e-13);
    const auto p = [&](const Vector2d& y) { return mc.p(y, t); };
    EXPECT_NEAR(mc.grad_p(x, t).x(), ddx(p, x, 0), 1e-8);
    EXPECT_NEAR(mc.grad_p(x, t).y(), ddx(p, x, 1), 1e-8);
  }
}

TEST(CosineCase, SourceIsVelocityDivergence) {
  const ManufacturedCase mc = cosine_case();
  for (const Vector2d& x : interior_samples(50, 2)) {
    const double t = 0.03;
    const double div = ddx([&](const Vector2d& y) { return mc.u(y, t).x(); }, x, 0) +
                       ddx([&](const Vector2d& y) { return mc.u(y, t).y(); }, x, 1);
    EXPECT_NEAR(mc.source(x, t), div, 1e-7);
  }
}

TEST(CosineCase, TransportSourceMatchesFiniteDifferences) {
  CosineCaseParameters prm;
  prm.porosity = 0.6;
  const ManufacturedCase mc = cosine_case(prm);
  for (const Vector2d& x : interior_samples(100, 3)) {
    const double t = 0.05;
    const double e = 1e-5;
    const double c_t = (mc.c(x, t + e) - mc.c(x, t - e)) / (2.0 * e);
    const auto flux = [&](const Vector2d& y, int axis) { return mc.u(y, t)[axis] * mc.c(y, t) + mc.sigma(y, t)[axis]; };
    const double div_flux = ddx([&](const Vector2d& y) { return flux(y, 0); }, x, 0) +
                            ddx([&](const Vector2d& y) { return flux(y, 1); }, x, 1);
    // c*_inj = c, so q+ c* + q- c = q c.
    const double expected = prm.porosity * c_t + div_flux - mc.source(x, t) * mc.c(x, t);
    EXPECT_NEAR(mc.transport_source(x, t), expected, 1e-6 * (1.0 + std::abs(expected)));
  }
}

TEST(CosineCase, SourceHasZeroMeanAndBoundaryFluxesVanish) {
  const ManufacturedCase mc = cosine_case();
  const Mesh mesh = build_structured_mesh(16);
  double integral = 0.0;
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    const QuadratureRule rule = mesh.cell_quadrature(K, 10);
    for (Index q = 0; q < rule.size(); ++q) integral += rule.weights[q] * mc.source(rule.points.col(q), 0.04);
  }
  EXPECT_NEAR(integral, 0.0, 1e-12);
  for (const Facet& f : mesh.facets()) {
    if (!f.is_boundary()) continue;
    for (double s : {0.3, 0.5}) {
      const Vector2d x = (1.0 - s) * mesh.vertex(f.vertices[0]) + s * mesh.vertex(f.vertices[1]);
      EXPECT_NEAR(mc.u(x, 0.04).dot(f.normal), 0.0, 1e-13);
      EXPECT_NEAR(mc.sigma(x, 0.04).dot(f.normal), 0.0, 1e-13);
    }
  }
}

TEST(LinearCase, FieldsAreConsistent) {
  const ManufacturedCase mc = linear_case(Vector2d(1.0, -0.5), 0.2, Vector2d(0.3, 0.1), 0.4);
  const Vector2d x(0.3, 0.6);
  EXPECT_LE((mc.u(x, 0.0) + mc.grad_p(x, 0.0)).norm(), 1e-15);
  EXPECT_NEAR(mc.c(x, 0.5), 0.2 + 0.09 + 0.06 + 0.2, 1e-15);
  EXPECT_NEAR(mc.transport_source(x, 0.0), 0.4 + 0.3 - 0.05, 1e-15);
}

TEST(Consistency, LinearFieldsSatisfyBothSchemesOnInteriorRows) {
  const ManufacturedCase mc = linear_case(Vector2d(1.0, 0.0), 0.0, Vector2d(1.0, 0.0), 0.0);
  for (int nx : {2, 4}) {
    const ConsistencyResidual r = consistency_residual(mc, unit_mesh(nx), 1, 0.1, 0.01);
    // Boundary rows see u . n != 0, which the no-flow scheme does not admit.
    EXPECT_LE(r.darcy.interior(), 1e-11) << nx;
    EXPECT_LE(r.transport.interior(), 1e-11) << nx;
  }
}

TEST(Consistency, RestStateSatisfiesEveryRow) {
  const ManufacturedCase mc = linear_case(Vector2d::Zero(), 0.3, Vector2d::Zero(), 0.0);
  for (int k : {0, 1}) {
    const ConsistencyResidual r = consistency_residual(mc, unit_mesh(3), k, 0.1, 0.01);
    EXPECT_LE(r.darcy.all(), 1e-11);
    EXPECT_LE(r.transport.all(), 1e-11);
  }
}

TEST(Consistency, SmoothCaseDecreasesUnderRefinement) {
  const ManufacturedCase mc = cosine_case();
  for (int k : {0, 1}) {
    double prev_darcy = INFINITY, prev_transport = INFINITY;
    for (int nx : {4, 8, 16}) {
      const double dt = 1.0 / (nx * nx);
      const ConsistencyResidual r = consistency_residual(mc, unit_mesh(nx), k, 0.1, dt);
      EXPECT_LT(r.darcy.all(), prev_darcy) << "k " << k << " nx " << nx;
      EXPECT_LT(r.transport.all(), prev_transport) << "k " << k << " nx " << nx;
      prev_darcy = r.darcy.all();
      prev_transport = r.transport.all();
    }
  }
}

TEST(Consistency, LaggedMobilityResidualIsFirstOrder) {
  // Pressure rows see a(c(t - dt)) in place of a(c(t)), a defect of order dt.
  const ManufacturedCase mc = cosine_case();
  const auto mesh = unit_mesh(8);
  const double a = consistency_residual(mc, mesh, 1, 0.1, 0.02).darcy.all();
  const double b = consistency_residual(mc, mesh, 1, 0.1, 0.01).darcy.all();
  EXPECT_NEAR(a / b, 2.0, 0.1);
}

TEST(DofCounts, HybridizationRatio) {
  const Mesh mesh = build_structured_mesh(32);
  const DofCounts d = dof_counts(mesh, 1);
  EXPECT_EQ(d.multiplier, 2 * 2 * mesh.num_facets());
  EXPECT_EQ(d.eliminated, 2 * (8 + 3) * mesh.num_cells());
  EXPECT_NEAR(d.ratio(), 0.278, 0.005);
  EXPECT_LT(d.ratio(), 0.4);
  const DofCounts d0 = dof_counts(mesh, 0);
  EXPECT_EQ(d0.eliminated, 2 * 4 * mesh.num_cells());
}

TEST(ConvergenceStudy, RequiresThreeRefiningLevels) {
  const ManufacturedCase mc = cosine_case();
  EXPECT_THROW(run_convergence_study(mc, 1, {2, 4}, DtRule::SquareOfH), InvalidArgument);
  EXPECT_THROW(run_convergence_study(mc, 1, {2, 4, 4}, DtRule::SquareOfH), InvalidArgument);
}

TEST(ConvergenceStudy, OrdersAndCsvOnCoarseLevels) {
  CosineCaseParameters prm;
  prm.final_time = 0.02;
  const ManufacturedCase mc = cosine_case(prm);
  const ConvergenceReport report = run_convergence_study(mc, 1, {2, 4, 8}, DtRule::SquareOfH);
  ASSERT_EQ(report.levels.size(), 3u);
  EXPECT_NEAR(report.levels[2].dt, 0.02 / 2.0, 1e-15);  // ceil(0.02 * 64) = 2 steps
  for (const LevelResult& l : report.levels) {
    EXPECT_FALSE(l.failed) << l.failure;
    EXPECT_LE(l.audits.transport_conservation, 1e-10);
    EXPECT_LE(l.audits.darcy_conservation, 1e-10);
  }
  const std::vector<double> orders = report.orders(&FieldErrors::p);
  ASSERT_EQ(orders.size(), 2u);
  EXPECT_GT(orders[1], 1.5);
  std::ostringstream a, b;
  write_convergence_csv(report, a);
  write_convergence_csv(report, b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("k,nx,h,dt,steps", 0), 0u);
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(ConvergenceStudy, OrdersUndefinedAcrossFailedLevel) {
  ConvergenceReport report;
  report.levels.resize(3);
  for (int i = 0; i < 3; ++i) {
    report.levels[static_cast<std::size_t>(i)].h = 1.0 / (2 << i);
    report.levels[static_cast<std::size_t>(i)].errors.c = 1.0 / (1 << (2 * i));
  }
  report.levels[2].failed = true;
  const std::vector<double> o = report.orders(&FieldErrors::c);
  EXPECT_NEAR(o[0], 2.0, 1e-14);
  EXPECT_TRUE(std::isnan(o[1]));
}
