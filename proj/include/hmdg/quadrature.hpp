#pragma once

#include <Eigen/Dense>

namespace hmdg {

/// Points and weights of a quadrature rule. Points are stored column-wise.
struct QuadratureRule {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1] (exact to degree 2n-1).
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Rule on the reference triangle (0,0), (1,0), (0,1), exact for polynomials of
/// total degree <= `degree`. Collapsed (Duffy) Gauss-Legendre product rule;
/// weights sum to 1/2. Rules are cached, the returned reference stays valid.
const QuadratureRule& reference_triangle_rule(int degree);

/// Number of Gauss-Legendre points needed for exactness of the given degree.
inline int gauss_points_for_degree(int degree) { return degree < 1 ? 1 : (degree + 2) / 2; }

}  // namespace hmdg
