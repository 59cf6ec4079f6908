#include "hmdg/forms.hpp"

#include <algorithm>
#include <cmath>

#include "hmdg/darcy.hpp"
#include "hmdg/errors.hpp"

namespace hmdg {

double FormVectors::max_abs() const {
  double m = 0.0;
  for (const Eigen::VectorXd* v : {&flux, &cell, &facet})
    if (v->size() > 0) m = std::max(m, v->cwiseAbs().maxCoeff());
  return m;
}

double CoercivityIdentity::relative_defect() const {
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

CellVector cell_vector(const DiscreteField& w) {
  return [&w](Index c, const Eigen::Vector2d& x) { return evaluate_vector(w, c, x); };
}

CellScalar cell_scalar(const DiscreteField& f) {
  return [&f](Index c, const Eigen::Vector2d& x) { return evaluate_scalar(f, c, x); };
}

namespace {

CellVector cell_gradient(const DiscreteField& f) {
  return [&f](Index c, const Eigen::Vector2d& x) { return evaluate_gradient(f, c, x); };
}

FacetScalar facet_scalar(const DiscreteField& f) {
  return [&f](Index e, const Eigen::Vector2d& x) { return evaluate_trace(f, e, x); };
}

FormVectors zero_vectors(const HybridSpaces& spaces) {
  return {Eigen::VectorXd::Zero(spaces.flux->dofs_total()), Eigen::VectorXd::Zero(spaces.cell->dofs_total()),
          Eigen::VectorXd::Zero(spaces.facet->dofs_total())};
}

}  // namespace

DarcyTrial darcy_trial(const DiscreteField& u, const DiscreteField& p, const DiscreteField& lambda) {
  return {cell_vector(u), cell_scalar(p), cell_gradient(p), facet_scalar(lambda)};
}

TransportTrial transport_trial(const DiscreteField& sigma, const DiscreteField& c, const DiscreteField& lambda) {
  return {cell_vector(sigma), cell_scalar(c), cell_gradient(c), facet_scalar(lambda)};
}

FormVectors darcy_form(const HybridSpaces& spaces, const DarcyTrial& trial, const CellScalar& mobility,
                       int cell_degree) {
  const Mesh& mesh = *spaces.mesh;
  const int k = spaces.degree;
  const int nf = k + 1;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  if (cell_degree < 0) cell_degree = deg.cell + 2;
  FormVectors out = zero_vectors(spaces);
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    auto flux = out.flux.segment(spaces.flux->dof(K, 0), spaces.flux->local_dofs());
    auto cell = out.cell.segment(spaces.cell->dof(K, 0), spaces.cell->local_dofs());
    const QuadratureRule rule = mesh.cell_quadrature(K, cell_degree);
    const BasisValues rt = eval_cell_basis(*spaces.flux, K, rule.points);
    const BasisValues pk = eval_cell_basis(*spaces.cell, K, rule.points);
    for (Index q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = rule.points.col(q);
      const Eigen::Vector2d u = trial.u(K, x);
      const Eigen::Vector2d r = mobility(K, x) * u + trial.grad_p(K, x);
      flux += rule.weights[q] * (r.x() * rt.value.row(q) + r.y() * rt.value_y.row(q)).transpose();
      cell += rule.weights[q] * (u.x() * pk.grad_x.row(q) + u.y() * pk.grad_y.row(q)).transpose();
    }
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(K, i);
      const Eigen::Vector2d n = mesh.cell_facet_sign(K, i) * mesh.facet(f).normal;
      const FacetQuadrature fq = facet_quadrature(mesh, f, deg.facet + 2);
      const Eigen::MatrixXd trace = eval_facet_trace(*spaces.flux, f, K, fq.points);
      const Eigen::MatrixXd v = eval_cell_basis(*spaces.cell, K, fq.points).value;
      const Eigen::MatrixXd mu = facet_basis(k, fq.params);
      auto facet = out.facet.segment(spaces.facet->dof(f, 0), nf);
      for (Index q = 0; q < fq.size(); ++q) {
        const Eigen::Vector2d x = fq.points.col(q);
        const double un = trial.u(K, x).dot(n);
        flux += fq.weights[q] * (trial.lambda(f, x) - trial.p(K, x)) * trace.row(q).transpose();
        cell -= fq.weights[q] * un * v.row(q).transpose();
        facet += fq.weights[q] * un * mu.row(q).transpose();
      }
    }
  }
  return out;
}

FormVectors transport_form(const HybridSpaces& spaces, const TransportTrial& trial, const TransportVelocity& velocity,
                           const ProblemSpec& spec, double dt, int cell_degree) {
  if (velocity.table == nullptr) throw InvalidArgument("transport_form: upwind table required");
  const UpwindTable& table = *velocity.table;
  const Mesh& mesh = *spaces.mesh;
  const int k = spaces.degree;
  const int nf = k + 1;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  if (cell_degree < 0) cell_degree = deg.cell + 2;
  FormVectors out = zero_vectors(spaces);
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    auto flux = out.flux.segment(spaces.flux->dof(K, 0), spaces.flux->local_dofs());
    auto cell = out.cell.segment(spaces.cell->dof(K, 0), spaces.cell->local_dofs());
    const QuadratureRule rule = mesh.cell_quadrature(K, cell_degree);
    const BasisValues rt = eval_cell_basis(*spaces.flux, K, rule.points);
    const BasisValues pk = eval_cell_basis(*spaces.cell, K, rule.points);
    for (Index q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = rule.points.col(q);
      const Eigen::Vector2d u = velocity.u(K, x);
      const double phi = spec.porosity(x);
      const DispersionTensor<double> D = dispersion(u, phi, spec.d_m, spec.d_l, spec.d_t);
      const Eigen::Vector2d sigma = trial.sigma(K, x);
      const double c = trial.c(K, x);
      const Eigen::Vector2d r = D.inverse * sigma + trial.grad_c(K, x);
      const Eigen::Vector2d s = sigma + u * c;
      flux += rule.weights[q] * (r.x() * rt.value.row(q) + r.y() * rt.value_y.row(q)).transpose();
      cell += rule.weights[q] *
              (-phi * c / dt * pk.value.row(q) + s.x() * pk.grad_x.row(q) + s.y() * pk.grad_y.row(q)).transpose();
    }
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(K, i);
      const int sign = mesh.cell_facet_sign(K, i);
      const bool interior = !mesh.facet(f).is_boundary();
      const Eigen::Vector2d n = sign * mesh.facet(f).normal;
      const FacetQuadrature& fq = table.quadrature[static_cast<std::size_t>(f)];
      const Eigen::VectorXd& fluxes = table.flux[static_cast<std::size_t>(f)];
      const Eigen::MatrixXd trace = eval_facet_trace(*spaces.flux, f, K, fq.points);
      const Eigen::MatrixXd v = eval_cell_basis(*spaces.cell, K, fq.points).value;
      const Eigen::MatrixXd mu = facet_basis(k, fq.params);
      auto facet = out.facet.segment(spaces.facet->dof(f, 0), nf);
      for (Index q = 0; q < fq.size(); ++q) {
        const Eigen::Vector2d x = fq.points.col(q);
        const double c = trial.c(K, x);
        const double lambda = trial.lambda(f, x);
        const double un = sign * fluxes[q];
        const double c_hat = table.outflow(f, sign, q) ? c : (interior ? lambda : 0.0);
        const double total = trial.sigma(K, x).dot(n) + un * c_hat;
        flux += fq.weights[q] * (lambda - c) * trace.row(q).transpose();
        cell -= fq.weights[q] * total * v.row(q).transpose();
        facet += fq.weights[q] * total * mu.row(q).transpose();
      }
    }
  }
  return out;
}

Eigen::VectorXd cell_load(const HybridSpaces& spaces, const CellScalar& g, int quad_degree) {
  const Mesh& mesh = *spaces.mesh;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spaces.cell->dofs_total());
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    const QuadratureRule rule = mesh.cell_quadrature(K, quad_degree);
    const Eigen::MatrixXd v = eval_cell_basis(*spaces.cell, K, rule.points).value;
    Eigen::VectorXd gw(rule.size());
    for (Index q = 0; q < rule.size(); ++q) gw[q] = rule.weights[q] * g(K, rule.points.col(q));
    out.segment(spaces.cell->dof(K, 0), spaces.cell->local_dofs()) = v.transpose() * gw;
  }
  return out;
}

CoercivityIdentity coercivity_identity(const HybridSpaces& spaces, const TransportSolution& solution,
                                       const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                       double dt) {
  const Mesh& mesh = *spaces.mesh;
  const int k = spaces.degree;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  const FormVectors B = transport_form(spaces, transport_trial(solution.sigma, solution.c, solution.lambda),
                                       {cell_vector(u_h), &table}, spec, dt);
  CoercivityIdentity id;
  id.lhs = solution.sigma.coefficients.dot(B.flux) - solution.c.coefficients.dot(B.cell) -
           solution.lambda.coefficients.dot(B.facet);

  for (Index K = 0; K < mesh.num_cells(); ++K) {
    const QuadratureRule rule = mesh.cell_quadrature(K, deg.cell + 2);
    for (Index q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = rule.points.col(q);
      const Eigen::Vector2d u = evaluate_vector(u_h, K, x);
      const double phi = spec.porosity(x);
      const double c = evaluate_scalar(solution.c, K, x);
      const Eigen::Vector2d sigma = evaluate_vector(solution.sigma, K, x);
      const DispersionTensor<double> D = dispersion(u, phi, spec.d_m, spec.d_l, spec.d_t);
      id.rhs += rule.weights[q] * ((phi / dt + 0.5 * evaluate_divergence(u_h, K, x)) * c * c +
                                   sigma.dot(D.inverse * sigma));
    }
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(K, i);
      const int sign = mesh.cell_facet_sign(K, i);
      const FacetQuadrature& fq = table.quadrature[static_cast<std::size_t>(f)];
      const Eigen::VectorXd& fluxes = table.flux[static_cast<std::size_t>(f)];
      for (Index q = 0; q < fq.size(); ++q) {
        const Eigen::Vector2d x = fq.points.col(q);
        const double jump = evaluate_trace(solution.lambda, f, x) - evaluate_scalar(solution.c, K, x);
        id.rhs += 0.5 * fq.weights[q] * std::abs(sign * fluxes[q]) * jump * jump;
      }
    }
  }
  return id;
}

}  // namespace hmdg
