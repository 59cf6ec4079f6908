#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "hmdg/projections.hpp"

using namespace hmdg;
using Eigen::Vector2d;

namespace {

std::shared_ptr<const Mesh> unit_mesh(int nx) { return std::make_shared<const Mesh>(build_structured_mesh(nx)); }

double smooth(const Vector2d& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); }

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

// max over facets of |f - P f|_e.
double max_facet_error(const DiscreteField& field, const ScalarFunction& f) {
  const Mesh& mesh = field.space->mesh();
  double worst = 0.0;
  for (Index e = 0; e < mesh.num_facets(); ++e) {
    const FacetQuadrature q = facet_quadrature(mesh, e, 12);
    const Eigen::VectorXd values = facet_basis(field.space->degree(), q.params) * field.local(e);
    double sum = 0.0;
    for (Index p = 0; p < q.size(); ++p) sum += q.weights[p] * std::pow(f(q.points.col(p)) - values[p], 2);
    worst = std::max(worst, std::sqrt(sum));
  }
  return worst;
}

}  // namespace

TEST(ProjectCell, ReproducesPolynomials) {
  auto mesh = unit_mesh(3);
  for (int k : {0, 1}) {
    auto space = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, k);
    const ScalarFunction f = k == 0 ? ScalarFunction([](const Vector2d&) { return -2.5; })
                                    : ScalarFunction([](const Vector2d& x) { return 1.0 - 3.0 * x.x() + 0.5 * x.y(); });
    const DiscreteField pf = project_cell(f, space);
    EXPECT_LE(cell_l2_error(pf, f, 6), 1e-12);
    for (Index c = 0; c < mesh->num_cells(); ++c) {
      const Vector2d x = mesh->cell_centroid(c) + Vector2d(0.01, -0.02);
      EXPECT_NEAR(evaluate_scalar(pf, c, x), f(x), 1e-12);
    }
  }
}

TEST(ProjectCell, MeanOfXSquaredOnReferenceTriangle) {
  Eigen::Matrix2Xd v(2, 3);
  v << 0, 1, 0, 0, 0, 1;
  auto mesh = std::make_shared<const Mesh>(Mesh::from_connectivity(v, {{0, 1, 2}}));
  auto space = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, 0);
  const DiscreteField pf = project_cell([](const Vector2d& x) { return x.x() * x.x(); }, space);
  // int x^2 over the triangle is 1/12 and the area is 1/2.
  EXPECT_NEAR(pf.coefficients[0], 1.0 / 6.0, 1e-15);
}

TEST(ProjectCell, ConvergenceRate) {
  for (int k : {0, 1}) {
    std::vector<double> errors;
    for (int nx : {4, 8, 16, 32}) {
      auto space = std::make_shared<const FeSpace>(unit_mesh(nx), SpaceKind::CellPk, k);
      errors.push_back(cell_l2_error(project_cell(smooth, space), smooth, 8));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
      EXPECT_NEAR(observed_order(errors[i], errors[i + 1]), k + 1.0, 0.2) << "k=" << k;
  }
}

TEST(ProjectCell, OrthogonalityAndIdempotence) {
  auto mesh = unit_mesh(4);
  auto space = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, 1);
  const DiscreteField pf = project_cell(smooth, space);
  for (Index c = 0; c < mesh->num_cells(); ++c) {
    const QuadratureRule rule = mesh->cell_quadrature(c, 8);
    const BasisValues b = eval_cell_basis(*space, c, rule.points);
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(space->local_dofs());
    for (Index q = 0; q < rule.size(); ++q) {
      const double diff = smooth(rule.points.col(q)) - b.value.row(q).dot(pf.local(c));
      residual += rule.weights[q] * diff * b.value.row(q).transpose();
    }
    // The projection itself uses a degree 4 rule, so the residual against a
    // sharper rule is limited by that rule's error.
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-4 * mesh->cell_area(c));
  }
  const DiscreteField again =
      project_cell([&](Index c, const Vector2d& x) { return evaluate_scalar(pf, c, x); }, make_projection_target(space));
  EXPECT_LE((again.coefficients - pf.coefficients).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ProjectCell, ExactOrthogonalityWithMatchingRule) {
  auto mesh = unit_mesh(4);
  auto space = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, 1);
  const int degree = 10;
  const DiscreteField pf = project_cell(smooth, space, degree);
  double worst = 0.0;
  for (Index c = 0; c < mesh->num_cells(); ++c) {
    const QuadratureRule rule = mesh->cell_quadrature(c, degree);
    const BasisValues b = eval_cell_basis(*space, c, rule.points);
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(space->local_dofs());
    for (Index q = 0; q < rule.size(); ++q)
      residual += rule.weights[q] * (smooth(rule.points.col(q)) - b.value.row(q).dot(pf.local(c))) *
                  b.value.row(q).transpose();
    worst = std::max(worst, residual.cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-11);
}

TEST(ProjectFacet, ConstantAndLinear) {
  auto mesh = unit_mesh(1);
  auto p0 = std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, 0);
  auto p1 = std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, 1);
  const DiscreteField c0 = project_facet([](const Vector2d&) { return 0.7; }, p0);
  EXPECT_LE((c0.coefficients.array() - 0.7).abs().maxCoeff(), 1e-15);
  // On the bottom facet the arclength parameter is x, so f = s has mean 1/2.
  const ScalarFunction s = [](const Vector2d& x) { return x.x(); };
  const DiscreteField mean = project_facet(s, p0);
  const DiscreteField linear = project_facet(s, p1);
  for (Index f = 0; f < mesh->num_facets(); ++f) {
    if (mesh->facet(f).boundary_marker != 1) continue;
    EXPECT_NEAR(mean.coefficients[f], 0.5, 1e-15);
    EXPECT_NEAR(evaluate_trace(linear, f, Vector2d(0.3, 0.0)), 0.3, 1e-15);
  }
  EXPECT_LE(facet_l2_error(linear, s, 4), 1e-14);
}

TEST(ProjectFacet, ConvergenceRate) {
  // Per facet |f - P f|_e = O(h^{k + 3/2}).
  for (int k : {0, 1}) {
    std::vector<double> errors;
    for (int nx : {4, 8, 16, 32}) {
      auto space = std::make_shared<const FeSpace>(unit_mesh(nx), SpaceKind::FacetPk, k);
      errors.push_back(max_facet_error(project_facet(smooth, space), smooth));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
      EXPECT_NEAR(observed_order(errors[i], errors[i + 1]), k + 1.5, 0.2) << "k=" << k;
  }
}

TEST(ProjectFacet, Idempotence) {
  auto mesh = unit_mesh(4);
  auto space = std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, 1);
  const DiscreteField pf = project_facet(smooth, space);
  // Re-project the trace through facet lookups of the discrete field.
  const DiscreteField again = project_facet(
      [&](const Vector2d& x) {
        for (Index f = 0; f < mesh->num_facets(); ++f) {
          const Facet& facet = mesh->facet(f);
          const Vector2d a = mesh->vertex(facet.vertices[0]);
          const Vector2d b = mesh->vertex(facet.vertices[1]);
          const double cross = (b - a).x() * (x - a).y() - (b - a).y() * (x - a).x();
          const double t = (x - a).dot(b - a) / (b - a).squaredNorm();
          if (std::abs(cross) < 1e-14 && t > 1e-12 && t < 1.0 - 1e-12) return evaluate_trace(pf, f, x);
        }
        return std::nan("");
      },
      space);
  EXPECT_LE((again.coefficients - pf.coefficients).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(InterpolateRT, ConstantFieldFluxesAreNormalComponents) {
  auto mesh = unit_mesh(2);
  auto rt = std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 0);
  const DiscreteField w = interpolate_rt([](const Vector2d&) { return Vector2d(1.0, 0.0); }, rt);
  for (Index c = 0; c < mesh->num_cells(); ++c)
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(w.local(c)[i], mesh->facet(mesh->cell_facet(c, i)).normal.x(), 1e-15);
}

TEST(InterpolateRT, ReproducesRaviartThomasFields) {
  auto mesh = unit_mesh(3);
  // (a + c x, b + c y) is RT0; any linear field plus x times a linear scalar is RT1.
  const VectorFunction rt0 = [](const Vector2d& x) { return Vector2d(0.3 + 2.0 * x.x(), -1.0 + 2.0 * x.y()); };
  const VectorFunction rt1 = [](const Vector2d& x) {
    const double s = 0.5 - x.x() + 2.0 * x.y();
    return Vector2d(1.0 + x.y() + x.x() * s, 2.0 * x.x() - x.y() + x.y() * s);
  };
  EXPECT_LE(vector_l2_error(interpolate_rt(rt0, std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 0)), rt0, 6), 1e-13);
  EXPECT_LE(vector_l2_error(interpolate_rt(rt1, std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 1)), rt1, 6), 1e-13);
  EXPECT_LE(vector_l2_error(interpolate_rt(rt0, std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 1)), rt0, 6), 1e-13);
}

TEST(InterpolateRT, CommutingDiagram) {
  const VectorFunction w = [](const Vector2d& x) { return Vector2d(std::sin(M_PI * x.y()), std::sin(M_PI * x.x())); };
  const VectorFunction w2 = [](const Vector2d& x) {
    return Vector2d(std::sin(M_PI * x.x()) * x.y(), std::cos(M_PI * x.y()) + x.x() * x.x());
  };
  const ScalarFunction div_w2 = [](const Vector2d& x) {
    return M_PI * std::cos(M_PI * x.x()) * x.y() - M_PI * std::sin(M_PI * x.y());
  };
  auto mesh = unit_mesh(4);
  for (int k : {0, 1}) {
    auto rt = std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, k);
    auto pk = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, k);
    // div w = 0 for the first field, so the interpolant must be divergence free.
    const DiscreteField iw = interpolate_rt(w, rt);
    for (Index c = 0; c < mesh->num_cells(); ++c)
      EXPECT_NEAR(evaluate_divergence(iw, c, mesh->cell_centroid(c)), 0.0, 1e-11);
    const DiscreteField iw2 = interpolate_rt(w2, rt, 14);
    const DiscreteField pdiv = project_cell(div_w2, pk, 14);
    for (Index c = 0; c < mesh->num_cells(); ++c) {
      for (const Vector2d& x : {mesh->cell_centroid(c), Vector2d(mesh->vertex(mesh->cell(c)[1]))})
        EXPECT_NEAR(evaluate_divergence(iw2, c, x), evaluate_scalar(pdiv, c, x), 1e-11);
    }
  }
}

TEST(InterpolateRT, ConvergenceRate) {
  const VectorFunction w = [](const Vector2d& x) {
    return Vector2d(std::sin(M_PI * x.y()) * std::cos(x.x()), std::exp(x.x()) * std::sin(M_PI * x.x() * x.y()));
  };
  for (int k : {0, 1}) {
    std::vector<double> errors;
    for (int nx : {4, 8, 16, 32}) {
      auto rt = std::make_shared<const FeSpace>(unit_mesh(nx), SpaceKind::RTk, k);
      errors.push_back(vector_l2_error(interpolate_rt(w, rt), w, 8));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
      EXPECT_NEAR(observed_order(errors[i], errors[i + 1]), k + 1.0, 0.2) << "k=" << k;
  }
}

TEST(InterpolateRT, MomentResiduals) {
  auto mesh = unit_mesh(3);
  auto rt = std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 1);
  const VectorFunction w = [](const Vector2d& x) { return Vector2d(std::exp(x.y()), std::cos(2.0 * x.x())); };
  const int degree = 12;
  const DiscreteField iw = interpolate_rt(w, rt, degree);
  double worst = 0.0;
  for (Index c = 0; c < mesh->num_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh->cell_facet(c, i);
      const FacetQuadrature q = facet_quadrature(*mesh, f, degree);
      const Eigen::MatrixXd mu = facet_basis(1, q.params);
      const Eigen::VectorXd trace = eval_facet_trace(*rt, f, c, q.points) * iw.local(c);
      const Vector2d n = mesh->cell_facet_sign(c, i) * mesh->facet(f).normal;
      Eigen::Vector2d moment = Eigen::Vector2d::Zero();
      for (Index p = 0; p < q.size(); ++p)
        moment += q.weights[p] * (w(q.points.col(p)).dot(n) - trace[p]) * mu.row(p).transpose();
      worst = std::max(worst, moment.cwiseAbs().maxCoeff());
    }
    const QuadratureRule rule = mesh->cell_quadrature(c, degree);
    Vector2d mean = Vector2d::Zero();
    for (Index p = 0; p < rule.size(); ++p)
      mean += rule.weights[p] * (w(rule.points.col(p)) - evaluate_vector(iw, c, rule.points.col(p)));
    worst = std::max(worst, mean.cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-11);
}

TEST(AuxiliaryLifting, BoundedByDiscreteGradientNorm) {
  // The lifting constant C_c of the discrete norm equivalence is sampled on
  // random discrete pairs and must stay bounded under refinement.
  std::mt19937 rng(9);
  std::vector<double> constants;
  for (int nx : {2, 4, 8}) {
    auto mesh = unit_mesh(nx);
    const HybridSpaces s = HybridSpaces::create(mesh, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      DiscreteField c(s.cell, Eigen::VectorXd::Random(s.cell->dofs_total()));
      DiscreteField lambda(s.facet, Eigen::VectorXd::Random(s.facet->dofs_total()));
      const DiscreteField tau = auxiliary_lifting(c, lambda, s.flux, mesh->h());
      double tau_norm = 0.0, grad_norm = 0.0, jump_norm = 0.0;
      for (Index K = 0; K < mesh->num_cells(); ++K) {
        const QuadratureRule rule = mesh->cell_quadrature(K, 6);
        for (Index q = 0; q < rule.size(); ++q) {
          tau_norm += rule.weights[q] * evaluate_vector(tau, K, rule.points.col(q)).squaredNorm();
          grad_norm += rule.weights[q] * evaluate_gradient(c, K, rule.points.col(q)).squaredNorm();
        }
        for (int i = 0; i < 3; ++i) {
          const Index f = mesh->cell_facet(K, i);
          const FacetQuadrature fq = facet_quadrature(*mesh, f, 4);
          for (Index q = 0; q < fq.size(); ++q) {
            const Vector2d x = fq.points.col(q);
            jump_norm += fq.weights[q] * std::pow(evaluate_trace(lambda, f, x) - evaluate_scalar(c, K, x), 2);
          }
        }
      }
      worst = std::max(worst, std::sqrt(tau_norm / (grad_norm + jump_norm / mesh->h())));
    }
    constants.push_back(worst);
  }
  RecordProperty("lifting_constants", std::to_string(constants[0]) + " " + std::to_string(constants[1]) + " " +
                                          std::to_string(constants[2]));
  EXPECT_LT(constants.back(), 2.0 * constants.front());
}
