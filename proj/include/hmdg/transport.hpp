#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hmdg/coefficients.hpp"
#include "hmdg/fe_spaces.hpp"
#include "hmdg/linsolve.hpp"

namespace hmdg {

enum class UpwindMode { Pointwise, FacetMean };
/// Placement of c* = c at production points (q < 0): implicit moves q^- c_h to
/// the left-hand side, explicit uses q^- c_prev on the right.
enum class ProductionClosure { Implicit, Explicit };

/// Facet quadrature points with the single-valued normal flux u_h . n_e and the
/// value that decides the upwind direction (equal to the flux in pointwise mode,
/// the facet mean of the flux in facet-mean mode).
///
/// A side with sign s (outward normal s n_e) is outflow at point q iff
/// s * direction > 0; ties count as inflow on both sides.
struct UpwindTable {
  UpwindMode mode = UpwindMode::Pointwise;
  int quad_order = 1;
  std::vector<FacetQuadrature> quadrature;
  std::vector<Eigen::VectorXd> flux;
  std::vector<Eigen::VectorXd> direction;

  bool outflow(Index facet, int sign, Index point) const {
    return sign * direction[static_cast<std::size_t>(facet)][point] > 0.0;
  }
  /// Cell supplying c at the point (the outflow side), or -1 if none.
  Index upwind_cell(const Mesh& mesh, Index facet, Index point) const;
};

/// Samples u_h . n_e at Gauss points of every facet. On interior facets the
/// value is the average of both sides' traces (they agree for a converged
/// pressure solve).
UpwindTable build_upwind_table(const DiscreteField& u_h, int quad_order, UpwindMode mode = UpwindMode::Pointwise);
/// Same from an analytic velocity.
UpwindTable build_upwind_table(const Mesh& mesh, const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u,
                               int quad_order, UpwindMode mode = UpwindMode::Pointwise);

struct TransportOptions {
  UpwindMode upwind = UpwindMode::Pointwise;
  ProductionClosure production = ProductionClosure::Implicit;
  double solver_tolerance = -1.0;
};

/// Data of one transport step at time t = t^n.
struct TransportStepData {
  double t = 0.0;
  double dt = 0.0;
  ScalarFunction source;       ///< q(., t), compatible
  ScalarFunction injected;     ///< c*_inj(., t)
  ScalarFunction extra;        ///< manufactured source, may be empty
};

TransportStepData make_step_data(const ProblemSpec& spec, const ScalarFunction& q, double t);

/// Cell blocks of the transport system. Unknowns per cell: sigma (RT_k),
/// c (P_k); multipliers lambda^c on the cell's three facets.
///   flux rows:    Dinv sigma - G^T c + C lambda                     = 0
///   balance rows: G sigma + (mass + advection - inflow_c - production) c
///                 + inflow_lambda lambda                             = load
///   facet rows:   C^T sigma + outflow_c c + lambda_lambda lambda      (summed over cells) = 0
struct LocalTransportBlocks {
  Index cell = -1;
  Eigen::MatrixXd Dinv;            ///< (D(u_h)^{-1} phi_j, phi_i)_K
  Eigen::MatrixXd G;               ///< (v_m, div phi_j)_K
  Eigen::MatrixXd C;               ///< <mu_l, phi_i . n_K>_{dK}
  Eigen::MatrixXd mass;            ///< (phi c_j, v_m)_K / dt
  Eigen::MatrixXd advection;       ///< ((div u_h) c_j + u_h . grad c_j, v_m)_K
  Eigen::MatrixXd inflow_c;        ///< <u_h . n_K c_j, v_m> over inflow points
  Eigen::MatrixXd inflow_lambda;   ///< <u_h . n_K mu_l, v_m> over interior inflow points
  Eigen::MatrixXd production;      ///< (q^- c_j, v_m)_K, zero for explicit closure
  Eigen::MatrixXd outflow_c;       ///< <u_h . n_K c_j, mu_l> over outflow points
  Eigen::MatrixXd lambda_lambda;   ///< <u_h . n_K mu_l', mu_l> over interior inflow points
  Eigen::VectorXd load;            ///< (q^+ c* + f + phi c_prev / dt [+ q^- c_prev], v_m)_K

  /// Full balance-row block acting on c.
  Eigen::MatrixXd balance_c() const { return mass + advection - inflow_c - production; }
};

LocalTransportBlocks assemble_local_transport(const HybridSpaces& spaces, Index cell, const DiscreteField& c_prev,
                                              const DiscreteField& u_h, const UpwindTable& table,
                                              const ProblemSpec& spec, const TransportStepData& data,
                                              const TransportOptions& options);

/// Global system on lambda^c with per-cell recovery x_K = y_K - Y_K lambda_K,
/// x_K = [sigma_K; c_K].
struct CondensedTransport {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<Eigen::MatrixXd> recovery;
  std::vector<Eigen::VectorXd> recovery_offset;
};

/// Checks the time-step bound (throws PreconditionError naming the cell),
/// assembles every cell and condenses to the multipliers.
CondensedTransport assemble_transport(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                      const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                      const TransportStepData& data, const TransportOptions& options);

/// Smallest value of phi/dt + q/2 (explicit) or phi/dt + |q|/2 (implicit)
/// over cell quadrature points, with the cell where it occurs.
struct TimeStepMargin {
  double value = 0.0;
  Index cell = -1;
};
TimeStepMargin time_step_margin(const Mesh& mesh, const ProblemSpec& spec, const TransportStepData& data,
                                ProductionClosure production, int quad_degree);

struct TransportSolution {
  DiscreteField sigma;
  DiscreteField c;
  DiscreteField lambda;
  double solver_residual = 0.0;
};

TransportSolution solve_transport_step(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                       const DiscreteField& u_h, const ProblemSpec& spec,
                                       const TransportStepData& data, const TransportOptions& options = {});
/// Same with a prebuilt upwind table.
TransportSolution solve_transport_step(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                       const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                       const TransportStepData& data, const TransportOptions& options = {});

/// Balance audit of one transport step.
struct TransportAudit {
  /// Per cell: (phi (c - c_prev)/dt, 1)_K + <sigma . n, 1>_{dK} + <u.n c, 1>_out
  ///   + <u.n lambda, 1>_in - (q c* + f, 1)_K.
  Eigen::VectorXd cell_residual;
  double global_residual = 0.0;
  /// int phi c_h before and after the step.
  double mass_before = 0.0;
  double mass_after = 0.0;
  /// (q c* + f, 1) integrated over the domain times dt.
  double source_mass = 0.0;
  /// max over facets of |<sigma . n + u.n c_hat, 1>| summed over both sides.
  double facet_pair = 0.0;
};

TransportAudit conservation_audit_transport(const TransportSolution& solution, const DiscreteField& c_prev,
                                            const UpwindTable& table, const ProblemSpec& spec,
                                            const TransportStepData& data, const TransportOptions& options);

/// max over facets and facet basis mu of |sum_K <sigma . n_K + u.n c_hat, mu>_e|.
double max_total_flux_jump(const TransportSolution& solution, const UpwindTable& table);

}  // namespace hmdg
