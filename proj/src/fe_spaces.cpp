#include "hmdg/fe_spaces.hpp"

#include <Eigen/LU>

#include "hmdg/errors.hpp"

namespace hmdg {

namespace {

struct LocalFrame {
  Eigen::Vector2d center;
  double scale;
};

LocalFrame frame_of(const Mesh& mesh, Index cell) { return {mesh.cell_centroid(cell), mesh.cell_diameter(cell)}; }

void scalar_monomials(int k, const LocalFrame& frame, const Eigen::Matrix2Xd& points, BasisValues& out) {
  const Index n = points.cols();
  const int dim = cell_pk_dim(k);
  out.value.resize(n, dim);
  out.grad_x.setZero(n, dim);
  out.grad_y.setZero(n, dim);
  out.value.col(0).setOnes();
  if (k >= 1) {
    const double inv = 1.0 / frame.scale;
    out.value.col(1) = (points.row(0).array() - frame.center.x()).transpose() * inv;
    out.value.col(2) = (points.row(1).array() - frame.center.y()).transpose() * inv;
    out.grad_x.col(1).setConstant(inv);
    out.grad_y.col(2).setConstant(inv);
  }
}

// Raw spanning set of RT_k in scaled coordinates (xi, eta):
//   k = 0: (1,0) (0,1) (xi,eta)
//   k = 1: (1,0) (0,1) (xi,0) (eta,0) (0,xi) (0,eta) xi(xi,eta) eta(xi,eta)
void rt_monomials(int k, const LocalFrame& frame, const Eigen::Matrix2Xd& points, BasisValues& out) {
  const Index n = points.cols();
  const int dim = rt_dim(k);
  const double inv = 1.0 / frame.scale;
  out.value.setZero(n, dim);
  out.value_y.setZero(n, dim);
  out.divergence.setZero(n, dim);
  const Eigen::ArrayXd xi = (points.row(0).array() - frame.center.x()).transpose() * inv;
  const Eigen::ArrayXd eta = (points.row(1).array() - frame.center.y()).transpose() * inv;
  out.value.col(0).setOnes();
  out.value_y.col(1).setOnes();
  if (k == 0) {
    out.value.col(2) = xi;
    out.value_y.col(2) = eta;
    out.divergence.col(2).setConstant(2.0 * inv);
    return;
  }
  out.value.col(2) = xi;
  out.divergence.col(2).setConstant(inv);
  out.value.col(3) = eta;
  out.value_y.col(4) = xi;
  out.value_y.col(5) = eta;
  out.divergence.col(5).setConstant(inv);
  out.value.col(6) = xi * xi;
  out.value_y.col(6) = xi * eta;
  out.divergence.col(6) = 3.0 * inv * xi;
  out.value.col(7) = xi * eta;
  out.value_y.col(7) = eta * eta;
  out.divergence.col(7) = 3.0 * inv * eta;
}

void check_degree(int k) {
  if (k != 0 && k != 1) throw InvalidArgument("polynomial degree must be 0 or 1, got " + std::to_string(k));
}

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree)
    : mesh_(std::move(mesh)), kind_(kind), degree_(degree) {
  check_degree(degree);
  if (!mesh_) throw InvalidArgument("FeSpace: null mesh");
  switch (kind_) {
    case SpaceKind::CellPk:
      local_dofs_ = cell_pk_dim(degree);
      break;
    case SpaceKind::FacetPk:
      local_dofs_ = facet_pk_dim(degree);
      break;
    case SpaceKind::RTk: {
      local_dofs_ = rt_dim(degree);
      rt_coefficients_.reserve(static_cast<std::size_t>(mesh_->num_cells()));
      for (Index c = 0; c < mesh_->num_cells(); ++c) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(rt_dual_matrix(*mesh_, c, degree));
        if (!lu.isInvertible()) throw AssemblyError("RT dual matrix is singular", c);
        rt_coefficients_.push_back(lu.inverse());
      }
      break;
    }
    default:
      throw InvalidArgument("FeSpace: unknown space kind");
  }
}

Index FeSpace::entity_count() const {
  return kind_ == SpaceKind::FacetPk ? mesh_->num_facets() : mesh_->num_cells();
}

const Eigen::MatrixXd& FeSpace::rt_coefficients(Index cell) const {
  if (kind_ != SpaceKind::RTk) throw InvalidArgument("rt_coefficients: not an RT space");
  return rt_coefficients_[static_cast<std::size_t>(cell)];
}

Eigen::MatrixXd facet_basis(int k, const Eigen::VectorXd& s) {
  Eigen::MatrixXd values(s.size(), k + 1);
  values.col(0).setOnes();
  if (k >= 1) values.col(1) = s;
  return values;
}

Eigen::VectorXd facet_parameters(const Mesh& mesh, Index facet, const Eigen::Matrix2Xd& points) {
  const Facet& f = mesh.facet(facet);
  const Eigen::Vector2d a = mesh.vertex(f.vertices[0]);
  const Eigen::Vector2d t = mesh.vertex(f.vertices[1]) - a;
  const double inv_len2 = 1.0 / t.squaredNorm();
  Eigen::VectorXd s(points.cols());
  for (Index q = 0; q < points.cols(); ++q) s[q] = 2.0 * (points.col(q) - a).dot(t) * inv_len2 - 1.0;
  return s;
}

Eigen::MatrixXd rt_dual_matrix(const Mesh& mesh, Index cell, int k) {
  check_degree(k);
  const int dim = rt_dim(k);
  const LocalFrame frame = frame_of(mesh, cell);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(dim, dim);
  BasisValues raw;
  for (int i = 0; i < 3; ++i) {
    const Index f = mesh.cell_facet(cell, i);
    const Facet& facet = mesh.facet(f);
    const FacetQuadrature rule = facet_quadrature(mesh, f, 2 * k + 2);
    rt_monomials(k, frame, rule.points, raw);
    const Eigen::MatrixXd flux = raw.value * facet.normal.x() + raw.value_y * facet.normal.y();
    const Eigen::MatrixXd mu = facet_basis(k, rule.params);
    for (int j = 0; j <= k; ++j) {
      const double norm2 = facet.length / (2.0 * j + 1.0);
      V.row(i * (k + 1) + j) = (mu.col(j).cwiseProduct(rule.weights)).transpose() * flux / norm2;
    }
  }
  if (k == 1) {
    const QuadratureRule rule = mesh.cell_quadrature(cell, 2);
    rt_monomials(k, frame, rule.points, raw);
    const double inv_area = 1.0 / mesh.cell_area(cell);
    V.row(6) = rule.weights.transpose() * raw.value * inv_area;
    V.row(7) = rule.weights.transpose() * raw.value_y * inv_area;
  }
  return V;
}

BasisValues eval_cell_basis(const FeSpace& space, Index cell, const Eigen::Matrix2Xd& points) {
  const LocalFrame frame = frame_of(space.mesh(), cell);
  BasisValues out;
  switch (space.kind()) {
    case SpaceKind::CellPk:
      scalar_monomials(space.degree(), frame, points, out);
      return out;
    case SpaceKind::RTk: {
      rt_monomials(space.degree(), frame, points, out);
      const Eigen::MatrixXd& C = space.rt_coefficients(cell);
      out.value = out.value * C;
      out.value_y = out.value_y * C;
      out.divergence = out.divergence * C;
      return out;
    }
    default:
      throw InvalidArgument("eval_cell_basis: facet spaces have no cell basis");
  }
}

Eigen::MatrixXd eval_facet_trace(const FeSpace& space, Index facet, Index cell, const Eigen::Matrix2Xd& points) {
  const Mesh& mesh = space.mesh();
  if (space.kind() == SpaceKind::FacetPk) {
    return facet_basis(space.degree(), facet_parameters(mesh, facet, points));
  }
  const FacetSide& side = mesh.side_of(facet, cell);
  BasisValues values = eval_cell_basis(space, cell, points);
  if (space.kind() == SpaceKind::CellPk) return values.value;
  const Eigen::Vector2d n = side.sign * mesh.facet(facet).normal;
  return values.value * n.x() + values.value_y * n.y();
}

DiscreteField::DiscreteField(std::shared_ptr<const FeSpace> s, Eigen::VectorXd c)
    : space(std::move(s)), coefficients(std::move(c)) {
  if (coefficients.size() != space->dofs_total()) {
    throw InvalidArgument("DiscreteField: coefficient length does not match the space");
  }
}

HybridSpaces HybridSpaces::create(std::shared_ptr<const Mesh> mesh, int k) {
  HybridSpaces s;
  s.mesh = mesh;
  s.degree = k;
  s.flux = std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, k);
  s.cell = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, k);
  s.facet = std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, k);
  return s;
}

double evaluate_scalar(const DiscreteField& field, Index cell, const Eigen::Vector2d& x) {
  const BasisValues b = eval_cell_basis(*field.space, cell, x);
  return b.value.row(0).dot(field.local(cell));
}

Eigen::Vector2d evaluate_gradient(const DiscreteField& field, Index cell, const Eigen::Vector2d& x) {
  if (field.space->kind() != SpaceKind::CellPk) throw InvalidArgument("evaluate_gradient: CellPk field expected");
  const BasisValues b = eval_cell_basis(*field.space, cell, x);
  return {b.grad_x.row(0).dot(field.local(cell)), b.grad_y.row(0).dot(field.local(cell))};
}

Eigen::Vector2d evaluate_vector(const DiscreteField& field, Index cell, const Eigen::Vector2d& x) {
  if (field.space->kind() != SpaceKind::RTk) throw InvalidArgument("evaluate_vector: RT field expected");
  const BasisValues b = eval_cell_basis(*field.space, cell, x);
  return {b.value.row(0).dot(field.local(cell)), b.value_y.row(0).dot(field.local(cell))};
}

double evaluate_divergence(const DiscreteField& field, Index cell, const Eigen::Vector2d& x) {
  if (field.space->kind() != SpaceKind::RTk) throw InvalidArgument("evaluate_divergence: RT field expected");
  const BasisValues b = eval_cell_basis(*field.space, cell, x);
  return b.divergence.row(0).dot(field.local(cell));
}

double evaluate_trace(const DiscreteField& field, Index facet, const Eigen::Vector2d& x) {
  if (field.space->kind() != SpaceKind::FacetPk) throw InvalidArgument("evaluate_trace: FacetPk field expected");
  const Eigen::MatrixXd b = eval_facet_trace(*field.space, facet, -1, x);
  return b.row(0).dot(field.local(facet));
}

}  // namespace hmdg
