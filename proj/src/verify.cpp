#include "hmdg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hmdg/errors.hpp"
#include "hmdg/forms.hpp"
#include "hmdg/projections.hpp"

namespace hmdg {

AuditSummary summarize_audits(const SimulationState& state) {
  AuditSummary s;
  for (const StepAudit& a : state.audits) {
    s.darcy_conservation = std::max(s.darcy_conservation, a.darcy_conservation);
    s.transport_conservation = std::max(s.transport_conservation, a.transport_conservation);
    s.transport_global = std::max(s.transport_global, std::abs(a.transport_global));
    s.darcy_flux_jump = std::max(s.darcy_flux_jump, a.darcy_flux_jump);
    s.darcy_boundary_flux = std::max(s.darcy_boundary_flux, a.darcy_boundary_flux);
    s.sigma_jump = std::max(s.sigma_jump, a.sigma_jump);
    s.total_flux_jump = std::max(s.total_flux_jump, a.total_flux_jump);
    s.facet_pair = std::max(s.facet_pair, a.facet_pair);
    s.coercivity_defect = std::max(s.coercivity_defect, a.coercivity_defect);
    s.max_mass_step_drift = std::max(s.max_mass_step_drift, std::abs(a.mass_change - a.source_mass));
  }
  s.mass_ledger_defect = std::abs(state.mass_ledger_defect());
  return s;
}

DofCounts dof_counts(const Mesh& mesh, int k) {
  DofCounts d;
  d.multiplier = 2 * facet_pk_dim(k) * mesh.num_facets();
  d.eliminated = 2 * (rt_dim(k) + cell_pk_dim(k)) * mesh.num_cells();
  return d;
}

std::vector<double> ConvergenceReport::orders(double FieldErrors::*member) const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const LevelResult& a = levels[i];
    const LevelResult& b = levels[i + 1];
    const double ea = a.errors.*member;
    const double eb = b.errors.*member;
    if (a.failed || b.failed || !(ea > 0.0) || !(eb > 0.0))
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    else
      out.push_back(std::log(ea / eb) / std::log(a.h / b.h));
  }
  return out;
}

namespace {

struct LevelRun {
  LevelResult result;
  SimulationState state;
};

LevelRun run_level_with_state(const ManufacturedCase& mcase, int k, std::shared_ptr<const Mesh> mesh, int nx,
                              double dt, const SimulationOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  LevelRun out;
  LevelResult& r = out.result;
  r.nx = nx;
  r.h = 1.0 / nx;
  r.dt = dt;
  r.dofs = dof_counts(*mesh, k);
  ProblemSpec spec = mcase.spec;
  spec.dt = dt;
  const int degree = QuadratureDegrees::for_degree(k).cell + 2;
  const double h = mesh->h();

  double sigma_sum = 0.0;
  double lambda_sum = 0.0;
  auto observer = [&](const SimulationState& s) {
    if (s.step == 0) return;
    const double t = s.t;
    const SpaceTimeVector& sigma = mcase.sigma;
    const double es = vector_l2_error(s.sigma, [&](const Eigen::Vector2d& x) { return sigma(x, t); }, degree);
    sigma_sum += s.dt * es * es;
    const Mesh& m = *s.spaces.mesh;
    double facet_sum = 0.0;
    for (Index K = 0; K < m.num_cells(); ++K) {
      for (int i = 0; i < 3; ++i) {
        const Index f = m.cell_facet(K, i);
        const FacetQuadrature fq = facet_quadrature(m, f, 2 * k + 3);
        const Eigen::VectorXd lam = facet_basis(k, fq.params) * s.lambda_c.local(f);
        for (Index q = 0; q < fq.size(); ++q) {
          const double d = lam[q] - mcase.c(fq.points.col(q), t);
          facet_sum += fq.weights[q] * d * d;
        }
      }
    }
    lambda_sum += s.dt * h * facet_sum;
  };

  try {
    out.state = run(spec, mesh, k, options, observer);
    const double T = out.state.t;
    r.steps = out.state.step;
    r.errors.u = vector_l2_error(out.state.u, [&](const Eigen::Vector2d& x) { return mcase.u(x, T); }, degree);
    r.errors.p = cell_l2_error(out.state.p, [&](const Eigen::Vector2d& x) { return mcase.p(x, T); }, degree);
    r.errors.c = cell_l2_error(out.state.c, [&](const Eigen::Vector2d& x) { return mcase.c(x, T); }, degree);
    r.errors.sigma = std::sqrt(sigma_sum);
    r.errors.lambda = std::sqrt(lambda_sum);
    r.audits = summarize_audits(out.state);
  } catch (const std::exception& e) {
    r.failed = true;
    r.failure = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

LevelResult run_level(const ManufacturedCase& mcase, int k, int nx, double dt, const SimulationOptions& options) {
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(nx));
  return run_level_with_state(mcase, k, std::move(mesh), nx, dt, options).result;
}

ConvergenceReport run_convergence_study(const ManufacturedCase& mcase, int k, const std::vector<int>& nx_levels,
                                        DtRule dt_rule, const SimulationOptions& options) {
  if (nx_levels.size() < 3) throw InvalidArgument("run_convergence_study: at least 3 levels required");
  for (std::size_t i = 0; i + 1 < nx_levels.size(); ++i)
    if (nx_levels[i + 1] <= nx_levels[i]) throw InvalidArgument("run_convergence_study: levels must strictly refine");
  ConvergenceReport report;
  report.k = k;
  const double T = mcase.spec.final_time;
  for (int nx : nx_levels) {
    double dt = mcase.spec.dt;
    if (dt_rule == DtRule::SquareOfH) dt = T / std::ceil(T * nx * nx - 1e-9);
    report.levels.push_back(run_level(mcase, k, nx, dt, options));
  }
  return report;
}

TemporalReport run_temporal_study(const ManufacturedCase& mcase, int k, int nx, const std::vector<double>& dts,
                                  const SimulationOptions& options) {
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(nx));
  TemporalReport report;
  std::vector<DiscreteField> finals;
  for (double dt : dts) {
    LevelRun run = run_level_with_state(mcase, k, mesh, nx, dt, options);
    if (run.result.failed) throw SolverError("temporal study failed at dt = " + std::to_string(dt) + ": " + run.result.failure);
    report.dt.push_back(dt);
    report.c_error.push_back(run.result.errors.c);
    report.audits.push_back(run.result.audits);
    finals.push_back(run.state.c);
  }
  const int degree = QuadratureDegrees::for_degree(k).cell + 2;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    const DiscreteField diff(finals[i].space, finals[i].coefficients - finals[i + 1].coefficients);
    report.successive.push_back(cell_l2_error(diff, [](const Eigen::Vector2d&) { return 0.0; }, degree));
  }
  for (std::size_t i = 0; i + 1 < report.successive.size(); ++i)
    report.orders.push_back(std::log(report.successive[i] / report.successive[i + 1]) /
                            std::log(report.dt[i] / report.dt[i + 1]));
  return report;
}

double ResidualNorms::interior() const { return std::max({flux, cell, facet_interior}); }
double ResidualNorms::all() const { return std::max(interior(), facet_boundary); }

namespace {

ResidualNorms norms_of(const FormVectors& v, const HybridSpaces& spaces) {
  ResidualNorms n;
  n.flux = v.flux.cwiseAbs().maxCoeff();
  n.cell = v.cell.cwiseAbs().maxCoeff();
  const Mesh& mesh = *spaces.mesh;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const double m = v.facet.segment(spaces.facet->dof(f, 0), spaces.facet->local_dofs()).cwiseAbs().maxCoeff();
    double& slot = mesh.facet(f).is_boundary() ? n.facet_boundary : n.facet_interior;
    slot = std::max(slot, m);
  }
  return n;
}

}  // namespace

ConsistencyResidual consistency_residual(const ManufacturedCase& mcase, std::shared_ptr<const Mesh> mesh, int k,
                                         double t, double dt) {
  const HybridSpaces spaces = HybridSpaces::create(mesh, k);
  const ProblemSpec& spec = mcase.spec;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  const double t_prev = t - dt;
  ConsistencyResidual out;
  out.h = mesh->h();
  out.dt = dt;

  const DarcyTrial darcy{
      [&](Index, const Eigen::Vector2d& x) { return mcase.u(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.p(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.grad_p(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.p(x, t); },
  };
  const CellScalar lagged_mobility = [&](Index, const Eigen::Vector2d& x) {
    return mobility(mcase.c(x, t_prev), spec, x);
  };
  FormVectors Bu = darcy_form(spaces, darcy, lagged_mobility);
  Bu.cell += cell_load(spaces, [&](Index, const Eigen::Vector2d& x) { return spec.source(x, t); }, deg.load + 2);
  out.darcy = norms_of(Bu, spaces);

  const UpwindTable table =
      build_upwind_table(*mesh, [&](const Eigen::Vector2d& x) { return mcase.u(x, t); }, deg.facet + 2);
  const TransportTrial transport{
      [&](Index, const Eigen::Vector2d& x) { return mcase.sigma(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.c(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.grad_c(x, t); },
      [&](Index, const Eigen::Vector2d& x) { return mcase.c(x, t); },
  };
  const TransportVelocity velocity{[&](Index, const Eigen::Vector2d& x) { return mcase.u(x, t); }, &table};
  FormVectors Bc = transport_form(spaces, transport, velocity, spec, dt);
  Bc.cell += cell_load(
      spaces,
      [&](Index, const Eigen::Vector2d& x) {
        const double q = spec.source(x, t);
        double value = std::max(q, 0.0) * spec.injected_concentration(x, t) + std::min(q, 0.0) * mcase.c(x, t) +
                       spec.porosity(x) * mcase.c(x, t_prev) / dt;
        if (spec.transport_source) value += spec.transport_source(x, t);
        return value;
      },
      deg.load + 2);
  out.transport = norms_of(Bc, spaces);
  return out;
}

namespace {

std::string number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10e", v);
  return buffer;
}

}  // namespace

void write_convergence_csv(const ConvergenceReport& report, std::ostream& out) {
  out << "k,nx,h,dt,steps,multiplier_dofs,eliminated_dofs,dof_ratio,err_u,err_p,err_c,err_sigma,err_lambda,"
         "order_u,order_p,order_c,order_sigma,order_lambda,max_darcy_conservation,max_transport_conservation,"
         "max_flux_jump_u,max_flux_jump_sigma,max_total_flux_jump,max_coercivity_defect,status\n";
  const std::vector<double> ou = report.orders(&FieldErrors::u);
  const std::vector<double> op = report.orders(&FieldErrors::p);
  const std::vector<double> oc = report.orders(&FieldErrors::c);
  const std::vector<double> os = report.orders(&FieldErrors::sigma);
  const std::vector<double> ol = report.orders(&FieldErrors::lambda);
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const LevelResult& l = report.levels[i];
    out << report.k << ',' << l.nx << ',' << number(l.h) << ',' << number(l.dt) << ',' << l.steps << ','
        << l.dofs.multiplier << ',' << l.dofs.eliminated << ',' << number(l.dofs.ratio());
    for (double v : {l.errors.u, l.errors.p, l.errors.c, l.errors.sigma, l.errors.lambda}) out << ',' << number(v);
    for (const std::vector<double>* o : {&ou, &op, &oc, &os, &ol}) {
      out << ',';
      if (i > 0) out << number((*o)[i - 1]);
    }
    for (double v : {l.audits.darcy_conservation, l.audits.transport_conservation, l.audits.darcy_flux_jump,
                     l.audits.sigma_jump, l.audits.total_flux_jump, l.audits.coercivity_defect})
      out << ',' << number(v);
    out << ',' << (l.failed ? "failed" : "ok") << '\n';
  }
}

void write_temporal_csv(const TemporalReport& report, std::ostream& out) {
  out << "dt,err_c,successive_difference,order\n";
  for (std::size_t i = 0; i < report.dt.size(); ++i) {
    out << number(report.dt[i]) << ',' << number(report.c_error[i]) << ',';
    if (i < report.successive.size()) out << number(report.successive[i]);
    out << ',';
    if (i >= 1 && i - 1 < report.orders.size()) out << number(report.orders[i - 1]);
    out << '\n';
  }
}

}  // namespace hmdg
