#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmdg/coupler.hpp"
#include "hmdg/manufactured.hpp"

namespace hmdg {

/// Error measures of one run against the closed-form fields.
struct FieldErrors {
  double u = 0.0;       ///< ||u(T) - u_h||
  double p = 0.0;       ///< ||p(T) - p_h||
  double c = 0.0;       ///< ||c(T) - c_h||
  double sigma = 0.0;   ///< (dt sum_n ||sigma(t_n) - sigma_h^n||^2)^{1/2}
  double lambda = 0.0;  ///< (dt sum_n h |lambda_h^{c,n} - c(t_n)|^2_{dT_h})^{1/2}
};

/// Worst audit values over all steps of a run.
struct AuditSummary {
  double darcy_conservation = 0.0;
  double transport_conservation = 0.0;
  double transport_global = 0.0;
  double darcy_flux_jump = 0.0;
  double darcy_boundary_flux = 0.0;
  double sigma_jump = 0.0;
  double total_flux_jump = 0.0;
  double facet_pair = 0.0;
  double coercivity_defect = 0.0;
  double max_mass_step_drift = 0.0;  ///< max_n |mass change - source mass|
  double mass_ledger_defect = 0.0;
};

AuditSummary summarize_audits(const SimulationState& state);

/// Multiplier unknowns of both condensed systems against the eliminated
/// (sigma, c) + (u, p) unknowns.
struct DofCounts {
  Index multiplier = 0;
  Index eliminated = 0;
  double ratio() const { return eliminated == 0 ? 0.0 : static_cast<double>(multiplier) / static_cast<double>(eliminated); }
};
DofCounts dof_counts(const Mesh& mesh, int k);

enum class DtRule {
  SquareOfH,  ///< dt = T / ceil(T nx^2): dt <= h^2 and divides T
  Fixed,      ///< dt taken from the case
};

struct LevelResult {
  int nx = 0;
  double h = 0.0;
  double dt = 0.0;
  int steps = 0;
  DofCounts dofs;
  FieldErrors errors;
  AuditSummary audits;
  double seconds = 0.0;
  bool failed = false;
  std::string failure;
};

struct ConvergenceReport {
  int k = 0;
  std::vector<LevelResult> levels;

  /// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive successful levels;
  /// NaN where undefined. `member` selects the error.
  std::vector<double> orders(double FieldErrors::*member) const;
};

/// Runs the case on structured nx x nx meshes of the unit square. Requires at
/// least 3 levels with strictly increasing nx. A failing level is recorded and
/// the study continues.
ConvergenceReport run_convergence_study(const ManufacturedCase& mcase, int k, const std::vector<int>& nx_levels,
                                        DtRule dt_rule, const SimulationOptions& options = {});

/// One run with errors accumulated along the way.
LevelResult run_level(const ManufacturedCase& mcase, int k, int nx, double dt, const SimulationOptions& options);

/// Temporal refinement on a fixed mesh.
struct TemporalReport {
  std::vector<double> dt;
  std::vector<double> c_error;       ///< against the closed form at T
  std::vector<double> successive;    ///< ||c_h^{dt_i} - c_h^{dt_{i+1}}|| at T
  std::vector<double> orders;        ///< log(successive_i / successive_{i+1}) / log(dt_i / dt_{i+1})
  std::vector<AuditSummary> audits;
};
TemporalReport run_temporal_study(const ManufacturedCase& mcase, int k, int nx, const std::vector<double>& dts,
                                  const SimulationOptions& options = {});

/// Max-norm residuals of one form over groups of test functions.
struct ResidualNorms {
  double flux = 0.0;
  double cell = 0.0;
  double facet_interior = 0.0;
  double facet_boundary = 0.0;
  double interior() const;
  double all() const;
};

struct ConsistencyResidual {
  double h = 0.0;
  double dt = 0.0;
  ResidualNorms darcy;
  ResidualNorms transport;
};

/// Both schemes with the exact fields at time t inserted (lambda = p,
/// lambda^c = c, lagged data from t - dt), tested with every discrete basis
/// function.
ConsistencyResidual consistency_residual(const ManufacturedCase& mcase, std::shared_ptr<const Mesh> mesh, int k,
                                         double t, double dt);

/// CSV with one row per level and one order column per error measure.
void write_convergence_csv(const ConvergenceReport& report, std::ostream& out);
void write_temporal_csv(const TemporalReport& report, std::ostream& out);

}  // namespace hmdg
