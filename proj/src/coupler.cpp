#include "hmdg/coupler.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "hmdg/errors.hpp"
#include "hmdg/forms.hpp"
#include "hmdg/projections.hpp"

namespace hmdg {

namespace {

double stored_mass(const DiscreteField& c, const ProblemSpec& spec, int quad_degree) {
  const Mesh& mesh = c.space->mesh();
  double total = 0.0;
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    const QuadratureRule rule = mesh.cell_quadrature(K, quad_degree);
    const Eigen::VectorXd values = eval_cell_basis(*c.space, K, rule.points).value * c.local(K);
    for (Index q = 0; q < rule.size(); ++q) total += rule.weights[q] * spec.porosity(rule.points.col(q)) * values[q];
  }
  return total;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string with_step(int step, const std::exception& e) {
  return "step " + std::to_string(step) + ": " + e.what();
}

}  // namespace

double SimulationState::mass_ledger_defect() const {
  double injected = 0.0;
  for (const StepAudit& a : audits) injected += a.source_mass;
  const double stored = audits.empty() ? initial_mass : audits.back().mass;
  return injected - (stored - initial_mass);
}

SimulationState initialize(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, int k) {
  SimulationState state;
  state.total_steps = time_step_count(spec);
  state.dt = spec.dt;
  state.spaces = HybridSpaces::create(std::move(mesh), k);
  const HybridSpaces& s = state.spaces;
  state.u = DiscreteField(s.flux);
  state.p = DiscreteField(s.cell);
  state.lambda = DiscreteField(s.facet);
  state.sigma = DiscreteField(s.flux);
  state.c = project_cell(spec.initial_concentration, s.cell);
  state.lambda_c = DiscreteField(s.facet);
  state.initial_mass = stored_mass(state.c, spec, QuadratureDegrees::for_degree(k).cell);
  return state;
}

void advance(SimulationState& state, const ProblemSpec& spec, const SimulationOptions& options) {
  if (state.step >= state.total_steps) throw InvalidArgument("advance: final time already reached");
  const HybridSpaces& spaces = state.spaces;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(spaces.degree);
  const int n = state.step + 1;
  const double t = n * state.dt;
  StepAudit audit;
  audit.step = n;
  audit.t = t;

  try {
    auto start = std::chrono::steady_clock::now();
    state.call_trace.push_back("darcy " + std::to_string(n));
    DarcySolution darcy = solve_darcy_step(spaces, state.c, spec, t, options.darcy);
    state.darcy_seconds += seconds_since(start);
    const ScalarFunction q = compatible_source(spec, t, darcy.source);
    audit.darcy_solver_residual = darcy.solver_residual;
    audit.source_shift = darcy.source.shift;
    audit.darcy_conservation = local_conservation_audit(darcy.u, q, deg.load).cwiseAbs().maxCoeff();
    audit.darcy_flux_jump = max_normal_jump(darcy.u);
    audit.darcy_boundary_flux = max_boundary_flux(darcy.u);

    start = std::chrono::steady_clock::now();
    state.call_trace.push_back("transport " + std::to_string(n));
    TransportStepData data = make_step_data(spec, q, t);
    data.dt = state.dt;
    const UpwindTable table = build_upwind_table(darcy.u, deg.facet, options.transport.upwind);
    TransportSolution transport =
        solve_transport_step(spaces, state.c, darcy.u, table, spec, data, options.transport);
    state.transport_seconds += seconds_since(start);

    const TransportAudit balance =
        conservation_audit_transport(transport, state.c, table, spec, data, options.transport);
    audit.transport_solver_residual = transport.solver_residual;
    audit.transport_conservation = balance.cell_residual.cwiseAbs().maxCoeff();
    audit.transport_global = balance.global_residual;
    audit.mass = stored_mass(transport.c, spec, deg.cell);
    audit.mass_change = audit.mass - (state.audits.empty() ? state.initial_mass : state.audits.back().mass);
    audit.source_mass = balance.source_mass;
    audit.sigma_jump = max_normal_jump(transport.sigma);
    audit.total_flux_jump = max_total_flux_jump(transport, table);
    audit.facet_pair = balance.facet_pair;
    if (options.audit_coercivity)
      audit.coercivity_defect =
          coercivity_identity(spaces, transport, darcy.u, table, spec, state.dt).relative_defect();

    state.u = std::move(darcy.u);
    state.p = std::move(darcy.p);
    state.lambda = std::move(darcy.lambda);
    state.sigma = std::move(transport.sigma);
    state.c = std::move(transport.c);
    state.lambda_c = std::move(transport.lambda);
  } catch (const PreconditionError& e) {
    throw PreconditionError(with_step(n, e));
  } catch (const ConfigError& e) {
    throw ConfigError(with_step(n, e));
  } catch (const AssemblyError& e) {
    throw AssemblyError("step " + std::to_string(n) + ": " + e.message(), e.cell());
  } catch (const SolverError& e) {
    throw SolverError(with_step(n, e), e.pivot(), e.residual());
  }
  state.step = n;
  state.t = t;
  state.audits.push_back(audit);
}

SimulationState run(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, int k,
                    const SimulationOptions& options, const StepObserver& observer) {
  SimulationState state = initialize(spec, std::move(mesh), k);
  if (observer) observer(state);
  while (state.step < state.total_steps) {
    advance(state, spec, options);
    if (observer) observer(state);
  }
  return state;
}

namespace {

std::string number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10e", v);
  return buffer;
}

}  // namespace

void write_audit_csv(const SimulationState& state, std::ostream& out) {
  out << "step,t,darcy_solver_residual,transport_solver_residual,darcy_conservation,darcy_flux_jump,"
         "darcy_boundary_flux,transport_conservation,transport_global,mass,mass_change,source_mass,sigma_jump,"
         "total_flux_jump,facet_pair,coercivity_defect,source_shift\n";
  for (const StepAudit& a : state.audits) {
    out << a.step;
    for (double v : {a.t, a.darcy_solver_residual, a.transport_solver_residual, a.darcy_conservation,
                     a.darcy_flux_jump, a.darcy_boundary_flux, a.transport_conservation, a.transport_global, a.mass,
                     a.mass_change, a.source_mass, a.sigma_jump, a.total_flux_jump, a.facet_pair,
                     a.coercivity_defect, a.source_shift})
      out << ',' << number(v);
    out << '\n';
  }
}

void write_vtk(const SimulationState& state, std::ostream& out) {
  const Mesh& mesh = *state.spaces.mesh;
  out << "# vtk DataFile Version 3.0\n";
  out << "hmdg step " << state.step << " t " << number(state.t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    out << number(mesh.vertex(v).x()) << ' ' << number(mesh.vertex(v).y()) << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (Index K = 0; K < mesh.num_cells(); ++K) {
    const auto& cell = mesh.cell(K);
    out << "3 " << cell[0] << ' ' << cell[1] << ' ' << cell[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (Index K = 0; K < mesh.num_cells(); ++K) out << "5\n";
  out << "CELL_DATA " << mesh.num_cells() << '\n';
  for (const auto& [name, field] : {std::pair<const char*, const DiscreteField*>{"concentration", &state.c},
                                    {"pressure", &state.p}}) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Index K = 0; K < mesh.num_cells(); ++K) out << number(evaluate_scalar(*field, K, mesh.cell_centroid(K))) << '\n';
  }
  for (const auto& [name, field] : {std::pair<const char*, const DiscreteField*>{"velocity", &state.u},
                                    {"dispersive_flux", &state.sigma}}) {
    out << "VECTORS " << name << " double\n";
    for (Index K = 0; K < mesh.num_cells(); ++K) {
      const Eigen::Vector2d w = evaluate_vector(*field, K, mesh.cell_centroid(K));
      out << number(w.x()) << ' ' << number(w.y()) << " 0\n";
    }
  }
}

void write_vtk(const SimulationState& state, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open snapshot file " + path.string());
  write_vtk(state, out);
}

}  // namespace hmdg
