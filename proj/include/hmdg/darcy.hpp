#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "hmdg/coefficients.hpp"
#include "hmdg/fe_spaces.hpp"
#include "hmdg/linsolve.hpp"

namespace hmdg {

/// Quadrature degrees shared by both condensed systems for RT_k / P_k.
struct QuadratureDegrees {
  int cell;    ///< bilinear cell terms: 2k + 2
  int facet;   ///< facet terms: 2k + 1
  int load;    ///< right-hand sides with non-polynomial data: 2k + 4

  static QuadratureDegrees for_degree(int k) { return {2 * k + 2, 2 * k + 1, 2 * k + 4}; }
};

/// Cell blocks of the hybridized mixed pressure system:
///   A(i, j) = (a(c_prev) phi_j, phi_i)_K        RT x RT
///   B(m, j) = (v_m, div phi_j)_K                 P_k x RT
///   C(i, l) = <mu_l, phi_i . n_K>_{dK}           RT x local facet dofs
///   g(m)    = (q, v_m)_K
/// Local facet dofs are ordered facet 0, 1, 2 of the cell, k + 1 each.
struct LocalDarcyBlocks {
  Index cell = -1;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::VectorXd g;
};

/// Integrated source data of one time level.
struct SourceBalance {
  double integral = 0.0;      ///< sum_K (q, 1)_K
  double abs_integral = 0.0;  ///< sum_K (|q|, 1)_K
  /// Uniform shift removing the quadrature defect: integral / |Omega|.
  double shift = 0.0;
};

SourceBalance source_balance(const Mesh& mesh, const ScalarFunction& q, int quad_degree);

struct DarcyOptions {
  double gauge_value = 0.0;
  /// Compatibility threshold on |int q| relative to int |q| (absolute floor 1e-10).
  double compat_tol = 1e-3;
  /// Relative residual tolerance of the multiplier solve; negative = default.
  double solver_tolerance = -1.0;
};

/// `q` is the source at the current time (after any compatibility shift).
LocalDarcyBlocks assemble_local_darcy(const HybridSpaces& spaces, Index cell, const DiscreteField& c_prev,
                                      const ProblemSpec& spec, const ScalarFunction& q);

/// Multiplier system S lambda = r with per-cell recovery
///   [u_K; p_K] = -X_K lambda_K - z_K.
struct CondensedSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<Eigen::MatrixXd> recovery;
  std::vector<Eigen::VectorXd> recovery_offset;
  /// Multiplier dof fixed to zero by the pressure gauge, or -1.
  Index pinned_dof = -1;
};

/// Eliminates (u, p) cell by cell. Throws AssemblyError naming the cell if a
/// local saddle block is singular. With `pin_gauge`, the constant mode of
/// facet 0 is fixed so the result is SPD.
CondensedSystem condense_darcy(const HybridSpaces& spaces, const std::vector<LocalDarcyBlocks>& blocks,
                               bool pin_gauge = true);

/// Local multiplier dof indices (global) of a cell, ordered as in LocalDarcyBlocks::C.
std::vector<Index> cell_multiplier_dofs(const HybridSpaces& spaces, Index cell);

struct DarcySolution {
  DiscreteField u;
  DiscreteField p;
  DiscreteField lambda;
  double solver_residual = 0.0;
  SourceBalance source;
};

/// One pressure/velocity solve with a(c_prev) lagged. Throws PreconditionError
/// if q is incompatible with the no-flow boundary, SolverError on failure.
DarcySolution solve_darcy_step(const HybridSpaces& spaces, const DiscreteField& c_prev, const ProblemSpec& spec,
                               double t, const DarcyOptions& options = {});

/// Source at time t with the compatibility shift of `balance` removed.
ScalarFunction compatible_source(const ProblemSpec& spec, double t, const SourceBalance& balance);

/// Per cell: <u . n_K, 1>_{dK} - (q, 1)_K.
Eigen::VectorXd local_conservation_audit(const DiscreteField& u, const ScalarFunction& q, int quad_degree);

/// max over interior facets e and facet basis mu of |<[w . n], mu>_e| for an RT
/// field w, where [w . n] is the sum of both sides' outward traces.
double max_normal_jump(const DiscreteField& w);
/// max over boundary facets and facet basis mu of |<w . n, mu>_e|.
double max_boundary_flux(const DiscreteField& w);

/// Residual norms of the uncondensed equations with the solution inserted,
/// each relative to the norm of the corresponding block right-hand side or 1.
struct DarcyResiduals {
  double flux = 0.0;
  double divergence = 0.0;
  double continuity = 0.0;
};
DarcyResiduals darcy_residuals(const HybridSpaces& spaces, const DarcySolution& solution,
                               const DiscreteField& c_prev, const ProblemSpec& spec, const ScalarFunction& q);

}  // namespace hmdg
