#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hmdg/coefficients.hpp"
#include "hmdg/fe_spaces.hpp"

namespace hmdg {

/// Scalar function that may depend on the cell it is evaluated in (broken fields).
using CellFunction = std::function<double(Index cell, const Eigen::Vector2d&)>;
using VectorFunction = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Per-entity factorized Gram matrices of a CellPk or FacetPk space.
struct ProjectionTarget {
  std::shared_ptr<const FeSpace> space;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> gram;
  int quad_degree = 0;
};

/// Default quadrature degree 2k + 2.
ProjectionTarget make_projection_target(std::shared_ptr<const FeSpace> space, int quad_degree = -1);

/// L2 projection onto CellPk: (f - P f, v)_K = 0 for all v in P_k(K).
DiscreteField project_cell(const CellFunction& f, const ProjectionTarget& target);
DiscreteField project_cell(const ScalarFunction& f, std::shared_ptr<const FeSpace> space, int quad_degree = -1);

/// L2 projection onto FacetPk: <f - P f, mu>_e = 0 for all mu in P_k(e).
DiscreteField project_facet(const ScalarFunction& f, const ProjectionTarget& target);
DiscreteField project_facet(const ScalarFunction& f, std::shared_ptr<const FeSpace> space, int quad_degree = -1);

/// Raviart-Thomas interpolant: matches the normal moments against P_k(e) on
/// every facet and the moments against [P_{k-1}(K)]^2 on every cell.
DiscreteField interpolate_rt(const VectorFunction& w, std::shared_ptr<const FeSpace> space, int quad_degree = -1);

/// Verification helper: the element-wise lifting tau in RT_k with
///   (tau, omega)_K = (grad c_h, omega)_K          for omega in [P_{k-1}(K)]^2,
///   <tau . n, mu>_e = <(lambda_h - c_h) / h, mu>_e  for mu in P_k(e), e in dK.
DiscreteField auxiliary_lifting(const DiscreteField& c_h, const DiscreteField& lambda_h,
                                std::shared_ptr<const FeSpace> rt_space, double h);

/// Broken L2 norm of (f - field) over all cells.
double cell_l2_error(const DiscreteField& field, const CellFunction& f, int quad_degree);
double cell_l2_error(const DiscreteField& field, const ScalarFunction& f, int quad_degree);
/// L2 norm of (w - field) for an RT field.
double vector_l2_error(const DiscreteField& field, const VectorFunction& w, int quad_degree);
/// (sum_e |f - field|_e^2)^{1/2} over all facets, each facet counted once.
double facet_l2_error(const DiscreteField& field, const ScalarFunction& f, int quad_degree);

}  // namespace hmdg
