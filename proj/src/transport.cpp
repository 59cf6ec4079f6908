#include "hmdg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmdg/darcy.hpp"
#include "hmdg/errors.hpp"

namespace hmdg {

Index UpwindTable::upwind_cell(const Mesh& mesh, Index facet, Index point) const {
  const Facet& f = mesh.facet(facet);
  for (int s = 0; s < f.num_sides; ++s) {
    const FacetSide& side = f.sides[static_cast<std::size_t>(s)];
    if (outflow(facet, side.sign, point)) return side.cell;
  }
  return -1;
}

UpwindTable build_upwind_table(const DiscreteField& u_h, int quad_order, UpwindMode mode) {
  if (u_h.space->kind() != SpaceKind::RTk) throw InvalidArgument("build_upwind_table: RT velocity expected");
  const Mesh& mesh = u_h.space->mesh();
  UpwindTable table;
  table.mode = mode;
  table.quad_order = quad_order;
  table.quadrature.reserve(static_cast<std::size_t>(mesh.num_facets()));
  table.flux.reserve(static_cast<std::size_t>(mesh.num_facets()));
  table.direction.reserve(static_cast<std::size_t>(mesh.num_facets()));
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    FacetQuadrature fq = facet_quadrature(mesh, f, quad_order);
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(fq.size());
    for (int s = 0; s < facet.num_sides; ++s) {
      const FacetSide& side = facet.sides[static_cast<std::size_t>(s)];
      flux += side.sign * (eval_facet_trace(*u_h.space, f, side.cell, fq.points) * u_h.local(side.cell));
    }
    flux /= facet.num_sides;
    Eigen::VectorXd direction = flux;
    if (mode == UpwindMode::FacetMean) direction.setConstant(fq.weights.dot(flux) / facet.length);
    table.quadrature.push_back(std::move(fq));
    table.flux.push_back(std::move(flux));
    table.direction.push_back(std::move(direction));
  }
  return table;
}

UpwindTable build_upwind_table(const Mesh& mesh, const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u,
                               int quad_order, UpwindMode mode) {
  UpwindTable table;
  table.mode = mode;
  table.quad_order = quad_order;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    FacetQuadrature fq = facet_quadrature(mesh, f, quad_order);
    Eigen::VectorXd flux(fq.size());
    for (Index q = 0; q < fq.size(); ++q) flux[q] = u(fq.points.col(q)).dot(facet.normal);
    Eigen::VectorXd direction = flux;
    if (mode == UpwindMode::FacetMean) direction.setConstant(fq.weights.dot(flux) / facet.length);
    table.quadrature.push_back(std::move(fq));
    table.flux.push_back(std::move(flux));
    table.direction.push_back(std::move(direction));
  }
  return table;
}

TransportStepData make_step_data(const ProblemSpec& spec, const ScalarFunction& q, double t) {
  TransportStepData data;
  data.t = t;
  data.dt = spec.dt;
  data.source = q;
  const SpaceTimeFunction inj = spec.injected_concentration;
  data.injected = [inj, t](const Eigen::Vector2d& x) { return inj(x, t); };
  if (spec.transport_source) {
    const SpaceTimeFunction f = spec.transport_source;
    data.extra = [f, t](const Eigen::Vector2d& x) { return f(x, t); };
  }
  return data;
}

LocalTransportBlocks assemble_local_transport(const HybridSpaces& spaces, Index cell, const DiscreteField& c_prev,
                                              const DiscreteField& u_h, const UpwindTable& table,
                                              const ProblemSpec& spec, const TransportStepData& data,
                                              const TransportOptions& options) {
  const Mesh& mesh = *spaces.mesh;
  const int k = spaces.degree;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  const Index nrt = spaces.flux->local_dofs();
  const Index np = spaces.cell->local_dofs();
  const int nf = k + 1;
  const Index m = 3 * nf;

  LocalTransportBlocks b;
  b.cell = cell;
  b.Dinv = Eigen::MatrixXd::Zero(nrt, nrt);
  b.advection = Eigen::MatrixXd::Zero(np, np);

  const QuadratureRule rule = mesh.cell_quadrature(cell, deg.cell);
  const BasisValues rt = eval_cell_basis(*spaces.flux, cell, rule.points);
  const BasisValues pk = eval_cell_basis(*spaces.cell, cell, rule.points);
  const Eigen::VectorXd ux = rt.value * u_h.local(cell);
  const Eigen::VectorXd uy = rt.value_y * u_h.local(cell);
  const Eigen::VectorXd divu = rt.divergence * u_h.local(cell);
  Eigen::VectorXd phi_w(rule.size());
  for (Index q = 0; q < rule.size(); ++q) {
    const Eigen::Vector2d x = rule.points.col(q);
    const double phi = spec.porosity(x);
    phi_w[q] = rule.weights[q] * phi;
    const DispersionTensor<double> D = dispersion(Eigen::Vector2d(ux[q], uy[q]), phi, spec.d_m, spec.d_l, spec.d_t);
    Eigen::Matrix2Xd basis(2, nrt);
    basis.row(0) = rt.value.row(q);
    basis.row(1) = rt.value_y.row(q);
    b.Dinv.noalias() += rule.weights[q] * basis.transpose() * D.inverse * basis;
    const Eigen::RowVectorXd transport_row = divu[q] * pk.value.row(q) + ux[q] * pk.grad_x.row(q) + uy[q] * pk.grad_y.row(q);
    b.advection.noalias() += rule.weights[q] * pk.value.row(q).transpose() * transport_row;
  }
  b.Dinv = 0.5 * (b.Dinv + b.Dinv.transpose());
  b.G = pk.value.transpose() * rule.weights.asDiagonal() * rt.divergence;
  b.mass = pk.value.transpose() * phi_w.asDiagonal() * pk.value / data.dt;

  const QuadratureRule load = mesh.cell_quadrature(cell, deg.load);
  const Eigen::MatrixXd v = eval_cell_basis(*spaces.cell, cell, load.points).value;
  const Eigen::VectorXd c_old = v * c_prev.local(cell);
  Eigen::VectorXd q_minus_w(load.size());
  Eigen::VectorXd rhs_w(load.size());
  for (Index q = 0; q < load.size(); ++q) {
    const Eigen::Vector2d x = load.points.col(q);
    const double qv = data.source(x);
    const double q_plus = std::max(qv, 0.0);
    const double q_minus = std::min(qv, 0.0);
    q_minus_w[q] = load.weights[q] * q_minus;
    double rhs = q_plus * data.injected(x);
    if (data.extra) rhs += data.extra(x);
    if (options.production == ProductionClosure::Explicit) rhs += q_minus * c_old[q];
    rhs_w[q] = load.weights[q] * rhs;
  }
  b.production = options.production == ProductionClosure::Implicit
                     ? Eigen::MatrixXd(v.transpose() * q_minus_w.asDiagonal() * v)
                     : Eigen::MatrixXd::Zero(np, np);
  b.load = v.transpose() * rhs_w + b.mass * c_prev.local(cell);

  b.C = Eigen::MatrixXd::Zero(nrt, m);
  b.inflow_c = Eigen::MatrixXd::Zero(np, np);
  b.inflow_lambda = Eigen::MatrixXd::Zero(np, m);
  b.outflow_c = Eigen::MatrixXd::Zero(m, np);
  b.lambda_lambda = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < 3; ++i) {
    const Index f = mesh.cell_facet(cell, i);
    const int sign = mesh.cell_facet_sign(cell, i);
    const bool interior = !mesh.facet(f).is_boundary();
    const FacetQuadrature& fq = table.quadrature[static_cast<std::size_t>(f)];
    const Eigen::VectorXd& flux = table.flux[static_cast<std::size_t>(f)];
    const Eigen::MatrixXd trace = eval_facet_trace(*spaces.flux, f, cell, fq.points);
    const Eigen::MatrixXd cv = eval_cell_basis(*spaces.cell, cell, fq.points).value;
    const Eigen::MatrixXd mu = facet_basis(k, fq.params);
    b.C.middleCols(i * nf, nf) = trace.transpose() * fq.weights.asDiagonal() * mu;
    for (Index q = 0; q < fq.size(); ++q) {
      const double wun = fq.weights[q] * sign * flux[q];
      if (table.outflow(f, sign, q)) {
        b.outflow_c.middleRows(i * nf, nf).noalias() += wun * mu.row(q).transpose() * cv.row(q);
      } else {
        b.inflow_c.noalias() += wun * cv.row(q).transpose() * cv.row(q);
        if (interior) {
          b.inflow_lambda.middleCols(i * nf, nf).noalias() += wun * cv.row(q).transpose() * mu.row(q);
          b.lambda_lambda.block(i * nf, i * nf, nf, nf).noalias() += wun * mu.row(q).transpose() * mu.row(q);
        }
      }
    }
  }
  return b;
}

TimeStepMargin time_step_margin(const Mesh& mesh, const ProblemSpec& spec, const TransportStepData& data,
                                ProductionClosure production, int quad_degree) {
  TimeStepMargin margin{std::numeric_limits<double>::infinity(), -1};
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, quad_degree);
    for (Index q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = rule.points.col(q);
      const double qv = data.source(x);
      const double value =
          spec.porosity(x) / data.dt + (production == ProductionClosure::Implicit ? std::abs(qv) : qv) / 2.0;
      if (value < margin.value) margin = {value, c};
    }
  }
  return margin;
}

CondensedTransport assemble_transport(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                      const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                      const TransportStepData& data, const TransportOptions& options) {
  const Mesh& mesh = *spaces.mesh;
  if (!(data.dt > 0.0)) throw PreconditionError("time step must be positive");
  const TimeStepMargin margin =
      time_step_margin(mesh, spec, data, options.production, QuadratureDegrees::for_degree(spaces.degree).load);
  if (!(margin.value > 0.0)) {
    throw PreconditionError("time step too large: phi/dt + q/2 = " + std::to_string(margin.value) + " in cell " +
                            std::to_string(margin.cell));
  }

  const Index n = spaces.facet->dofs_total();
  CondensedTransport sys;
  sys.matrix = SparseMatrix(n, n);
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.recovery.resize(static_cast<std::size_t>(mesh.num_cells()));
  sys.recovery_offset.resize(static_cast<std::size_t>(mesh.num_cells()));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const LocalTransportBlocks b = assemble_local_transport(spaces, c, c_prev, u_h, table, spec, data, options);
    const Index nrt = b.Dinv.rows();
    const Index np = b.G.rows();
    const Index m = b.C.cols();
    Eigen::MatrixXd L(nrt + np, nrt + np);
    L << b.Dinv, -b.G.transpose(), b.G, b.balance_c();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
    if (!lu.isInvertible()) throw AssemblyError("singular local transport block", c);
    Eigen::MatrixXd Blam(nrt + np, m);
    Blam << b.C, b.inflow_lambda;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nrt + np);
    rhs.tail(np) = b.load;
    Eigen::MatrixXd Fx(m, nrt + np);
    Fx << b.C.transpose(), b.outflow_c;

    const Eigen::MatrixXd Y = lu.solve(Blam);
    const Eigen::VectorXd y = lu.solve(rhs);
    const Eigen::MatrixXd S = b.lambda_lambda - Fx * Y;
    const Eigen::VectorXd r = -Fx * y;
    const std::vector<Index> dofs = cell_multiplier_dofs(spaces, c);
    sys.matrix.add_block(dofs, dofs, S);
    for (std::size_t i = 0; i < dofs.size(); ++i) sys.rhs[dofs[i]] += r[static_cast<Index>(i)];
    sys.recovery[static_cast<std::size_t>(c)] = Y;
    sys.recovery_offset[static_cast<std::size_t>(c)] = y;
  }
  sys.matrix.finalize();
  return sys;
}

TransportSolution solve_transport_step(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                       const DiscreteField& u_h, const ProblemSpec& spec,
                                       const TransportStepData& data, const TransportOptions& options) {
  const UpwindTable table = build_upwind_table(u_h, QuadratureDegrees::for_degree(spaces.degree).facet, options.upwind);
  return solve_transport_step(spaces, c_prev, u_h, table, spec, data, options);
}

TransportSolution solve_transport_step(const HybridSpaces& spaces, const DiscreteField& c_prev,
                                       const DiscreteField& u_h, const UpwindTable& table, const ProblemSpec& spec,
                                       const TransportStepData& data, const TransportOptions& options) {
  const CondensedTransport sys = assemble_transport(spaces, c_prev, u_h, table, spec, data, options);
  const SolveResult solved = factor_solve(sys.matrix, sys.rhs, MatrixKind::General, options.solver_tolerance);

  TransportSolution sol{DiscreteField(spaces.flux), DiscreteField(spaces.cell), DiscreteField(spaces.facet, solved.x),
                        solved.residual};
  const Index nrt = spaces.flux->local_dofs();
  const Index np = spaces.cell->local_dofs();
  for (Index c = 0; c < spaces.mesh->num_cells(); ++c) {
    const std::vector<Index> dofs = cell_multiplier_dofs(spaces, c);
    Eigen::VectorXd lam(static_cast<Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) lam[static_cast<Index>(i)] = solved.x[dofs[i]];
    const Eigen::VectorXd x =
        sys.recovery_offset[static_cast<std::size_t>(c)] - sys.recovery[static_cast<std::size_t>(c)] * lam;
    sol.sigma.local(c) = x.head(nrt);
    sol.c.local(c) = x.segment(nrt, np);
  }
  return sol;
}

namespace {

/// sum over the sides of facet f of <sigma . n_K + u.n_K c_hat, mu_j>_e.
Eigen::VectorXd total_flux_moments(const TransportSolution& s, const UpwindTable& table, Index f) {
  const Mesh& mesh = s.c.space->mesh();
  const int k = s.c.space->degree();
  const Facet& facet = mesh.facet(f);
  const FacetQuadrature& fq = table.quadrature[static_cast<std::size_t>(f)];
  const Eigen::VectorXd& flux = table.flux[static_cast<std::size_t>(f)];
  const Eigen::MatrixXd mu = facet_basis(k, fq.params);
  const Eigen::VectorXd lam = mu * s.lambda.local(f);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(k + 1);
  for (int side = 0; side < facet.num_sides; ++side) {
    const FacetSide& fs = facet.sides[static_cast<std::size_t>(side)];
    const Eigen::VectorXd sn = eval_facet_trace(*s.sigma.space, f, fs.cell, fq.points) * s.sigma.local(fs.cell);
    const Eigen::VectorXd cv = eval_facet_trace(*s.c.space, f, fs.cell, fq.points) * s.c.local(fs.cell);
    Eigen::VectorXd integrand = sn;
    for (Index q = 0; q < fq.size(); ++q) {
      const double un = fs.sign * flux[q];
      if (table.outflow(f, fs.sign, q))
        integrand[q] += un * cv[q];
      else if (!facet.is_boundary())
        integrand[q] += un * lam[q];
    }
    moments += mu.transpose() * integrand.cwiseProduct(fq.weights);
  }
  return moments;
}

}  // namespace

double max_total_flux_jump(const TransportSolution& solution, const UpwindTable& table) {
  const Mesh& mesh = solution.c.space->mesh();
  double worst = 0.0;
  for (Index f = 0; f < mesh.num_facets(); ++f)
    worst = std::max(worst, total_flux_moments(solution, table, f).cwiseAbs().maxCoeff());
  return worst;
}

TransportAudit conservation_audit_transport(const TransportSolution& solution, const DiscreteField& c_prev,
                                            const UpwindTable& table, const ProblemSpec& spec,
                                            const TransportStepData& data, const TransportOptions& options) {
  const Mesh& mesh = solution.c.space->mesh();
  const int k = solution.c.space->degree();
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  TransportAudit audit;
  audit.cell_residual = Eigen::VectorXd::Zero(mesh.num_cells());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, deg.cell);
    const Eigen::MatrixXd v = eval_cell_basis(*solution.c.space, c, rule.points).value;
    const Eigen::VectorXd cn = v * solution.c.local(c);
    const Eigen::VectorXd co = v * c_prev.local(c);
    double stored_new = 0.0, stored_old = 0.0;
    for (Index q = 0; q < rule.size(); ++q) {
      const double phi = spec.porosity(rule.points.col(q));
      stored_new += rule.weights[q] * phi * cn[q];
      stored_old += rule.weights[q] * phi * co[q];
    }
    audit.mass_after += stored_new;
    audit.mass_before += stored_old;

    double boundary = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(c, i);
      const int sign = mesh.cell_facet_sign(c, i);
      const bool interior = !mesh.facet(f).is_boundary();
      const FacetQuadrature& fq = table.quadrature[static_cast<std::size_t>(f)];
      const Eigen::VectorXd& flux = table.flux[static_cast<std::size_t>(f)];
      const Eigen::VectorXd sn = eval_facet_trace(*solution.sigma.space, f, c, fq.points) * solution.sigma.local(c);
      const Eigen::VectorXd cv = eval_facet_trace(*solution.c.space, f, c, fq.points) * solution.c.local(c);
      const Eigen::VectorXd lam = facet_basis(k, fq.params) * solution.lambda.local(f);
      for (Index q = 0; q < fq.size(); ++q) {
        double value = sn[q];
        const double un = sign * flux[q];
        if (table.outflow(f, sign, q))
          value += un * cv[q];
        else if (interior)
          value += un * lam[q];
        boundary += fq.weights[q] * value;
      }
    }

    const QuadratureRule load = mesh.cell_quadrature(c, deg.load);
    const Eigen::MatrixXd vl = eval_cell_basis(*solution.c.space, c, load.points).value;
    const Eigen::VectorXd cl = vl * solution.c.local(c);
    const Eigen::VectorXd col = vl * c_prev.local(c);
    double source = 0.0;
    for (Index q = 0; q < load.size(); ++q) {
      const Eigen::Vector2d x = load.points.col(q);
      const double qv = data.source(x);
      const double produced = options.production == ProductionClosure::Implicit ? cl[q] : col[q];
      double value = std::max(qv, 0.0) * data.injected(x) + std::min(qv, 0.0) * produced;
      if (data.extra) value += data.extra(x);
      source += load.weights[q] * value;
    }
    audit.source_mass += data.dt * source;
    audit.cell_residual[c] = (stored_new - stored_old) / data.dt + boundary - source;
  }
  audit.global_residual = audit.cell_residual.sum();
  for (Index f = 0; f < mesh.num_facets(); ++f)
    audit.facet_pair = std::max(audit.facet_pair, std::abs(total_flux_moments(solution, table, f)[0]));
  return audit;
}

}  // namespace hmdg
