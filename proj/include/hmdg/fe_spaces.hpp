#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hmdg/mesh.hpp"

namespace hmdg {

/// CellPk: broken P_k on cells. FacetPk: P_k on each facet, single-valued.
/// RTk: broken Raviart-Thomas RT_k = [P_k]^2 + x P_k on cells.
enum class SpaceKind { CellPk, FacetPk, RTk };

inline int cell_pk_dim(int k) { return (k + 1) * (k + 2) / 2; }
inline int facet_pk_dim(int k) { return k + 1; }
inline int rt_dim(int k) { return (k + 1) * (k + 3); }

/// Degree-of-freedom layout and basis of one discrete space, k in {0, 1}.
///
/// Bases:
///  - CellPk: scaled monomials 1, (x - x_K)/h_K, (y - y_K)/h_K about the centroid.
///  - FacetPk: Legendre polynomials 1, s in the facet parameter s in [-1, 1].
///  - RTk: nodal basis dual to the functionals
///      N_{e,j}(w) = <w . n_e, P_j>_e / <P_j, P_j>_e     (global facet normal n_e)
///      N_{K,i}(w) = mean of component i of w over K   (k = 1 only)
///    so facet coefficients are the Legendre coefficients of the normal flux.
/// Local RT order: facet 0 moments, facet 1, facet 2, interior moments.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree);

  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  /// Local dofs per cell (CellPk, RTk) or per facet (FacetPk).
  int local_dofs() const { return local_dofs_; }
  Index entity_count() const;
  Index dofs_total() const { return entity_count() * local_dofs_; }
  Index dof(Index entity, int local) const { return entity * local_dofs_ + local; }

  /// RTk only: coefficients of the nodal basis in the raw monomial basis.
  const Eigen::MatrixXd& rt_coefficients(Index cell) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  SpaceKind kind_;
  int degree_;
  int local_dofs_;
  std::vector<Eigen::MatrixXd> rt_coefficients_;
};

/// Basis values at a set of points; rows are points, columns local dofs.
/// Scalar spaces fill `value`, `grad_x`, `grad_y`; RTk fills `value`
/// (x-component), `value_y` and `divergence`.
struct BasisValues {
  Eigen::MatrixXd value;
  Eigen::MatrixXd value_y;
  Eigen::MatrixXd grad_x;
  Eigen::MatrixXd grad_y;
  Eigen::MatrixXd divergence;
};

/// Cell basis at physical points of `cell`. FacetPk is rejected.
BasisValues eval_cell_basis(const FeSpace& space, Index cell, const Eigen::Matrix2Xd& points);

/// Traces on facet `facet` seen from `cell` (must be adjacent). Rows are points.
/// CellPk: cell basis values; RTk: normal trace with the cell's outward normal;
/// FacetPk: facet basis (`cell` may be -1).
Eigen::MatrixXd eval_facet_trace(const FeSpace& space, Index facet, Index cell, const Eigen::Matrix2Xd& points);

/// Legendre facet basis of degree k at parameters s.
Eigen::MatrixXd facet_basis(int k, const Eigen::VectorXd& s);
/// Facet parameter s in [-1, 1] of physical points on facet f.
Eigen::VectorXd facet_parameters(const Mesh& mesh, Index facet, const Eigen::Matrix2Xd& points);

/// Matrix of RT degrees of freedom applied to the raw monomial basis of cell c.
/// Its inverse is `FeSpace::rt_coefficients`.
Eigen::MatrixXd rt_dual_matrix(const Mesh& mesh, Index cell, int k);

/// Coefficient vector bound to a space.
struct DiscreteField {
  std::shared_ptr<const FeSpace> space;
  Eigen::VectorXd coefficients;

  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const FeSpace> s)
      : space(std::move(s)), coefficients(Eigen::VectorXd::Zero(space->dofs_total())) {}
  DiscreteField(std::shared_ptr<const FeSpace> s, Eigen::VectorXd c);

  auto local(Index entity) const { return coefficients.segment(entity * space->local_dofs(), space->local_dofs()); }
  auto local(Index entity) { return coefficients.segment(entity * space->local_dofs(), space->local_dofs()); }
};

/// The three spaces of one hybridized discretization: RT_k fluxes, broken
/// P_k cell unknowns and P_k facet multipliers.
struct HybridSpaces {
  std::shared_ptr<const Mesh> mesh;
  int degree = 0;
  std::shared_ptr<const FeSpace> flux;
  std::shared_ptr<const FeSpace> cell;
  std::shared_ptr<const FeSpace> facet;

  static HybridSpaces create(std::shared_ptr<const Mesh> mesh, int k);
};

double evaluate_scalar(const DiscreteField& field, Index cell, const Eigen::Vector2d& x);
Eigen::Vector2d evaluate_gradient(const DiscreteField& field, Index cell, const Eigen::Vector2d& x);
Eigen::Vector2d evaluate_vector(const DiscreteField& field, Index cell, const Eigen::Vector2d& x);
double evaluate_divergence(const DiscreteField& field, Index cell, const Eigen::Vector2d& x);
/// FacetPk field value on facet f at a physical point of the facet.
double evaluate_trace(const DiscreteField& field, Index facet, const Eigen::Vector2d& x);

}  // namespace hmdg
