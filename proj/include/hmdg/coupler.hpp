#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hmdg/coefficients.hpp"
#include "hmdg/darcy.hpp"
#include "hmdg/fe_spaces.hpp"
#include "hmdg/transport.hpp"

namespace hmdg {

struct SimulationOptions {
  DarcyOptions darcy;
  TransportOptions transport;
  /// Evaluate the coercivity identity after every transport solve.
  bool audit_coercivity = true;
};

/// Audit record of one time step.
struct StepAudit {
  int step = 0;
  double t = 0.0;
  double darcy_solver_residual = 0.0;
  double transport_solver_residual = 0.0;
  double darcy_conservation = 0.0;     ///< max_K |<u.n,1>_dK - (q,1)_K|
  double darcy_flux_jump = 0.0;        ///< max interior <[u.n], mu>
  double darcy_boundary_flux = 0.0;    ///< max boundary <u.n, mu>
  double transport_conservation = 0.0; ///< max_K |transport balance|
  double transport_global = 0.0;       ///< sum_K transport balance
  double mass = 0.0;                   ///< int phi c_h after the step
  double mass_change = 0.0;            ///< mass - previous mass
  double source_mass = 0.0;            ///< dt (q c* + f, 1)
  double sigma_jump = 0.0;             ///< max interior <[sigma.n], mu>
  double total_flux_jump = 0.0;        ///< max <sigma.n + u.n c_hat, mu> summed over sides
  double facet_pair = 0.0;
  double coercivity_defect = 0.0;      ///< relative, 0 when not evaluated
  double source_shift = 0.0;
};

struct SimulationState {
  HybridSpaces spaces;
  int step = 0;
  int total_steps = 0;
  double dt = 0.0;
  double t = 0.0;
  DiscreteField u, p, lambda;
  DiscreteField sigma, c, lambda_c;
  std::vector<StepAudit> audits;
  /// "darcy n" / "transport n" in call order.
  std::vector<std::string> call_trace;
  double initial_mass = 0.0;
  double darcy_seconds = 0.0;
  double transport_seconds = 0.0;

  /// sum of injected source mass minus the change of stored mass.
  double mass_ledger_defect() const;
};

/// c_h^0 = projection of c_0, everything else zero. Throws ConfigError unless
/// dt divides T.
SimulationState initialize(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, int k);

/// One step: pressure with the lagged concentration, then transport with the
/// new velocity. Errors are rethrown with the step number prepended.
void advance(SimulationState& state, const ProblemSpec& spec, const SimulationOptions& options = {});

using StepObserver = std::function<void(const SimulationState&)>;

/// initialize + advance to T. `observer` (if set) sees the initial state and
/// every step.
SimulationState run(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, int k,
                    const SimulationOptions& options = {}, const StepObserver& observer = {});

/// Audit CSV, one row per step; the header names the StepAudit fields.
void write_audit_csv(const SimulationState& state, std::ostream& out);

/// VTK legacy ASCII unstructured grid with cell-centroid values of p, c, u, sigma.
void write_vtk(const SimulationState& state, std::ostream& out);
void write_vtk(const SimulationState& state, const std::filesystem::path& path);

}  // namespace hmdg
