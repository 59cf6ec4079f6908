#pragma once

#include <functional>

#include <Eigen/Dense>

#include "hmdg/coefficients.hpp"
#include "hmdg/fe_spaces.hpp"
#include "hmdg/transport.hpp"

namespace hmdg {

// Integrated-by-parts evaluation of the two hybrid bilinear forms against every
// discrete test basis function. Trial fields are plain callables so the same
// code serves discrete solutions, single basis functions and exact fields.

using CellScalar = std::function<double(Index cell, const Eigen::Vector2d&)>;
using CellVector = std::function<Eigen::Vector2d(Index cell, const Eigen::Vector2d&)>;
using FacetScalar = std::function<double(Index facet, const Eigen::Vector2d&)>;

/// Values of a form for every test basis function, split by test space.
struct FormVectors {
  Eigen::VectorXd flux;   ///< RT_k tests
  Eigen::VectorXd cell;   ///< P_k cell tests
  Eigen::VectorXd facet;  ///< P_k facet tests

  double max_abs() const;
};

struct DarcyTrial {
  CellVector u;
  CellScalar p;
  CellVector grad_p;
  FacetScalar lambda;
};

struct TransportTrial {
  CellVector sigma;
  CellScalar c;
  CellVector grad_c;
  FacetScalar lambda;
};

DarcyTrial darcy_trial(const DiscreteField& u, const DiscreteField& p, const DiscreteField& lambda);
TransportTrial transport_trial(const DiscreteField& sigma, const DiscreteField& c, const DiscreteField& lambda);
CellVector cell_vector(const DiscreteField& w);
CellScalar cell_scalar(const DiscreteField& c);

/// B_u(trial, test) with a(c_prev) given pointwise by `mobility`:
///   (a u, tau) + (grad p, tau) + (u, grad v) + <lambda - p, tau . n> + <u . n, mu - v>.
/// Cell integrals use `cell_degree` (negative: 2k + 4), facet integrals order 2k + 3.
FormVectors darcy_form(const HybridSpaces& spaces, const DarcyTrial& trial, const CellScalar& mobility,
                       int cell_degree = -1);

/// Velocity data entering B_c: the cell-wise velocity (for D(u) and u c) and an
/// upwind table holding the single-valued facet flux and the flow direction.
struct TransportVelocity {
  CellVector u;
  const UpwindTable* table = nullptr;
};

/// B_c(trial, test):
///   -(phi c, v)/dt + (sigma + u c, grad v) + (D(u)^{-1} sigma + grad c, tau)
///   + <lambda - c, tau . n> + <sigma . n + u . n c_hat, mu - v>,
/// with c_hat = c on outflow points, lambda on interior inflow points and 0 on
/// boundary inflow points. Facet integrals use the table's quadrature.
FormVectors transport_form(const HybridSpaces& spaces, const TransportTrial& trial, const TransportVelocity& velocity,
                           const ProblemSpec& spec, double dt, int cell_degree = -1);

/// Cell-test load (g, v) for a pointwise integrand.
Eigen::VectorXd cell_load(const HybridSpaces& spaces, const CellScalar& g, int quad_degree);

/// The two sides of the coercivity identity for a discrete triple:
///   lhs = B_c((sigma, c, lambda), (sigma, -c, -lambda)),
///   rhs = ((phi/dt + div u_h / 2) c, c) + (D^{-1} sigma, sigma)
///         + 1/2 <|u . n| (lambda - c), lambda - c>.
struct CoercivityIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_defect() const;
};
CoercivityIdentity coercivity_identity(const HybridSpaces& spaces, const TransportSolution& solution,
                                       const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                       double dt);

}  // namespace hmdg
