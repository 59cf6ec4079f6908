#include "hmdg/projections.hpp"

#include <cmath>

#include "hmdg/errors.hpp"

namespace hmdg {

ProjectionTarget make_projection_target(std::shared_ptr<const FeSpace> space, int quad_degree) {
  if (space->kind() == SpaceKind::RTk) throw InvalidArgument("make_projection_target: scalar space expected");
  ProjectionTarget target;
  target.quad_degree = quad_degree < 0 ? 2 * space->degree() + 2 : quad_degree;
  const Mesh& mesh = space->mesh();
  target.gram.reserve(static_cast<std::size_t>(space->entity_count()));
  for (Index e = 0; e < space->entity_count(); ++e) {
    Eigen::MatrixXd phi;
    Eigen::VectorXd w;
    if (space->kind() == SpaceKind::CellPk) {
      const QuadratureRule rule = mesh.cell_quadrature(e, target.quad_degree);
      phi = eval_cell_basis(*space, e, rule.points).value;
      w = rule.weights;
    } else {
      const FacetQuadrature rule = facet_quadrature(mesh, e, std::max(1, target.quad_degree));
      phi = facet_basis(space->degree(), rule.params);
      w = rule.weights;
    }
    const Eigen::MatrixXd G = phi.transpose() * w.asDiagonal() * phi;
    target.gram.emplace_back(G);
    if (target.gram.back().info() != Eigen::Success) throw AssemblyError("Gram matrix is not positive definite", e);
  }
  target.space = std::move(space);
  return target;
}

DiscreteField project_cell(const CellFunction& f, const ProjectionTarget& target) {
  if (target.space->kind() != SpaceKind::CellPk) throw InvalidArgument("project_cell: CellPk target expected");
  DiscreteField out(target.space);
  const Mesh& mesh = target.space->mesh();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, target.quad_degree);
    const Eigen::MatrixXd phi = eval_cell_basis(*target.space, c, rule.points).value;
    Eigen::VectorXd fw(rule.size());
    for (Index q = 0; q < rule.size(); ++q) fw[q] = f(c, rule.points.col(q)) * rule.weights[q];
    out.local(c) = target.gram[static_cast<std::size_t>(c)].solve(phi.transpose() * fw);
  }
  return out;
}

DiscreteField project_cell(const ScalarFunction& f, std::shared_ptr<const FeSpace> space, int quad_degree) {
  return project_cell([&f](Index, const Eigen::Vector2d& x) { return f(x); },
                      make_projection_target(std::move(space), quad_degree));
}

DiscreteField project_facet(const ScalarFunction& f, const ProjectionTarget& target) {
  if (target.space->kind() != SpaceKind::FacetPk) throw InvalidArgument("project_facet: FacetPk target expected");
  DiscreteField out(target.space);
  const Mesh& mesh = target.space->mesh();
  for (Index e = 0; e < mesh.num_facets(); ++e) {
    const FacetQuadrature rule = facet_quadrature(mesh, e, std::max(1, target.quad_degree));
    const Eigen::MatrixXd mu = facet_basis(target.space->degree(), rule.params);
    Eigen::VectorXd fw(rule.size());
    for (Index q = 0; q < rule.size(); ++q) fw[q] = f(rule.points.col(q)) * rule.weights[q];
    out.local(e) = target.gram[static_cast<std::size_t>(e)].solve(mu.transpose() * fw);
  }
  return out;
}

DiscreteField project_facet(const ScalarFunction& f, std::shared_ptr<const FeSpace> space, int quad_degree) {
  return project_facet(f, make_projection_target(std::move(space), quad_degree));
}

DiscreteField interpolate_rt(const VectorFunction& w, std::shared_ptr<const FeSpace> space, int quad_degree) {
  if (space->kind() != SpaceKind::RTk) throw InvalidArgument("interpolate_rt: RT space expected");
  const int k = space->degree();
  const int degree = quad_degree < 0 ? 2 * k + 6 : quad_degree;
  const Mesh& mesh = space->mesh();
  DiscreteField out(space);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto dofs = out.local(c);
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(c, i);
      const Facet& facet = mesh.facet(f);
      const FacetQuadrature rule = facet_quadrature(mesh, f, std::max(1, degree));
      const Eigen::MatrixXd mu = facet_basis(k, rule.params);
      Eigen::VectorXd flux(rule.size());
      for (Index q = 0; q < rule.size(); ++q) flux[q] = w(rule.points.col(q)).dot(facet.normal) * rule.weights[q];
      for (int j = 0; j <= k; ++j) dofs[i * (k + 1) + j] = mu.col(j).dot(flux) * (2.0 * j + 1.0) / facet.length;
    }
    if (k == 1) {
      const QuadratureRule rule = mesh.cell_quadrature(c, degree);
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (Index q = 0; q < rule.size(); ++q) mean += rule.weights[q] * w(rule.points.col(q));
      mean /= mesh.cell_area(c);
      dofs[6] = mean.x();
      dofs[7] = mean.y();
    }
  }
  return out;
}

DiscreteField auxiliary_lifting(const DiscreteField& c_h, const DiscreteField& lambda_h,
                                std::shared_ptr<const FeSpace> rt_space, double h) {
  if (rt_space->kind() != SpaceKind::RTk) throw InvalidArgument("auxiliary_lifting: RT space expected");
  const int k = rt_space->degree();
  const Mesh& mesh = rt_space->mesh();
  DiscreteField out(rt_space);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto dofs = out.local(c);
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(c, i);
      const Facet& facet = mesh.facet(f);
      const int sign = mesh.cell_facet_sign(c, i);
      const FacetQuadrature rule = facet_quadrature(mesh, f, 2 * k + 1);
      const Eigen::MatrixXd mu = facet_basis(k, rule.params);
      const Eigen::VectorXd lam = eval_facet_trace(*lambda_h.space, f, -1, rule.points) * lambda_h.local(f);
      const Eigen::VectorXd cval = eval_facet_trace(*c_h.space, f, c, rule.points) * c_h.local(c);
      const Eigen::VectorXd jump = ((lam - cval) / h).cwiseProduct(rule.weights);
      for (int j = 0; j <= k; ++j) dofs[i * (k + 1) + j] = sign * mu.col(j).dot(jump) * (2.0 * j + 1.0) / facet.length;
    }
    if (k == 1) {
      // grad c_h is constant on the cell for P1.
      const Eigen::Vector2d g = evaluate_gradient(c_h, c, mesh.cell_centroid(c));
      dofs[6] = g.x();
      dofs[7] = g.y();
    }
  }
  return out;
}

double cell_l2_error(const DiscreteField& field, const CellFunction& f, int quad_degree) {
  const Mesh& mesh = field.space->mesh();
  double sum = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, quad_degree);
    const Eigen::VectorXd vals = eval_cell_basis(*field.space, c, rule.points).value * field.local(c);
    for (Index q = 0; q < rule.size(); ++q) {
      const double d = f(c, rule.points.col(q)) - vals[q];
      sum += rule.weights[q] * d * d;
    }
  }
  return std::sqrt(sum);
}

double cell_l2_error(const DiscreteField& field, const ScalarFunction& f, int quad_degree) {
  return cell_l2_error(field, [&f](Index, const Eigen::Vector2d& x) { return f(x); }, quad_degree);
}

double vector_l2_error(const DiscreteField& field, const VectorFunction& w, int quad_degree) {
  if (field.space->kind() != SpaceKind::RTk) throw InvalidArgument("vector_l2_error: RT field expected");
  const Mesh& mesh = field.space->mesh();
  double sum = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, quad_degree);
    const BasisValues b = eval_cell_basis(*field.space, c, rule.points);
    const Eigen::VectorXd vx = b.value * field.local(c);
    const Eigen::VectorXd vy = b.value_y * field.local(c);
    for (Index q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d d = w(rule.points.col(q)) - Eigen::Vector2d(vx[q], vy[q]);
      sum += rule.weights[q] * d.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double facet_l2_error(const DiscreteField& field, const ScalarFunction& f, int quad_degree) {
  if (field.space->kind() != SpaceKind::FacetPk) throw InvalidArgument("facet_l2_error: FacetPk field expected");
  const Mesh& mesh = field.space->mesh();
  double sum = 0.0;
  for (Index e = 0; e < mesh.num_facets(); ++e) {
    const FacetQuadrature rule = facet_quadrature(mesh, e, std::max(1, quad_degree));
    const Eigen::VectorXd vals = facet_basis(field.space->degree(), rule.params) * field.local(e);
    for (Index q = 0; q < rule.size(); ++q) {
      const double d = f(rule.points.col(q)) - vals[q];
      sum += rule.weights[q] * d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace hmdg
