#include "hmdg/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmdg/errors.hpp"

namespace hmdg {

SourceBalance source_balance(const Mesh& mesh, const ScalarFunction& q, int quad_degree) {
  SourceBalance b;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, quad_degree);
    for (Index i = 0; i < rule.size(); ++i) {
      const double v = q(rule.points.col(i));
      b.integral += rule.weights[i] * v;
      b.abs_integral += rule.weights[i] * std::abs(v);
    }
  }
  b.shift = b.integral / mesh.total_area();
  return b;
}

ScalarFunction compatible_source(const ProblemSpec& spec, double t, const SourceBalance& balance) {
  const SpaceTimeFunction q = spec.source;
  const double shift = balance.shift;
  return [q, t, shift](const Eigen::Vector2d& x) { return q(x, t) - shift; };
}

std::vector<Index> cell_multiplier_dofs(const HybridSpaces& spaces, Index cell) {
  const int nf = spaces.degree + 1;
  std::vector<Index> dofs;
  dofs.reserve(static_cast<std::size_t>(3 * nf));
  for (int i = 0; i < 3; ++i) {
    const Index f = spaces.mesh->cell_facet(cell, i);
    for (int j = 0; j < nf; ++j) dofs.push_back(spaces.facet->dof(f, j));
  }
  return dofs;
}

LocalDarcyBlocks assemble_local_darcy(const HybridSpaces& spaces, Index cell, const DiscreteField& c_prev,
                                      const ProblemSpec& spec, const ScalarFunction& q) {
  const Mesh& mesh = *spaces.mesh;
  const int k = spaces.degree;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(k);
  const int nrt = spaces.flux->local_dofs();
  const int np = spaces.cell->local_dofs();
  const int nf = k + 1;

  LocalDarcyBlocks blocks;
  blocks.cell = cell;

  const QuadratureRule rule = mesh.cell_quadrature(cell, deg.cell);
  const BasisValues rt = eval_cell_basis(*spaces.flux, cell, rule.points);
  const BasisValues pk = eval_cell_basis(*spaces.cell, cell, rule.points);
  const BasisValues ck = eval_cell_basis(*c_prev.space, cell, rule.points);
  const Eigen::VectorXd c_values = ck.value * c_prev.local(cell);
  Eigen::VectorXd aw(rule.size());
  for (Index i = 0; i < rule.size(); ++i) aw[i] = rule.weights[i] * mobility(c_values[i], spec, rule.points.col(i));
  blocks.A = rt.value.transpose() * aw.asDiagonal() * rt.value + rt.value_y.transpose() * aw.asDiagonal() * rt.value_y;
  blocks.A = 0.5 * (blocks.A + blocks.A.transpose());
  blocks.B = pk.value.transpose() * rule.weights.asDiagonal() * rt.divergence;

  blocks.C = Eigen::MatrixXd::Zero(nrt, 3 * nf);
  for (int i = 0; i < 3; ++i) {
    const Index f = mesh.cell_facet(cell, i);
    const FacetQuadrature fq = facet_quadrature(mesh, f, deg.facet);
    const Eigen::MatrixXd trace = eval_facet_trace(*spaces.flux, f, cell, fq.points);
    const Eigen::MatrixXd mu = facet_basis(k, fq.params);
    blocks.C.middleCols(i * nf, nf) = trace.transpose() * fq.weights.asDiagonal() * mu;
  }

  const QuadratureRule load = mesh.cell_quadrature(cell, deg.load);
  const Eigen::MatrixXd v = eval_cell_basis(*spaces.cell, cell, load.points).value;
  Eigen::VectorXd qw(load.size());
  for (Index i = 0; i < load.size(); ++i) qw[i] = load.weights[i] * q(load.points.col(i));
  blocks.g = v.transpose() * qw;
  (void)np;
  return blocks;
}

CondensedSystem condense_darcy(const HybridSpaces& spaces, const std::vector<LocalDarcyBlocks>& blocks,
                               bool pin_gauge) {
  const Mesh& mesh = *spaces.mesh;
  if (static_cast<Index>(blocks.size()) != mesh.num_cells())
    throw InvalidArgument("condense_darcy: one block per cell expected");
  const Index n = spaces.facet->dofs_total();
  CondensedSystem sys;
  sys.matrix = SparseMatrix(n, n);
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.recovery.resize(blocks.size());
  sys.recovery_offset.resize(blocks.size());
  sys.pinned_dof = pin_gauge ? spaces.facet->dof(0, 0) : -1;

  for (const LocalDarcyBlocks& b : blocks) {
    const Index nrt = b.A.rows();
    const Index np = b.B.rows();
    const Index m = b.C.cols();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nrt + np, nrt + np);
    L.topLeftCorner(nrt, nrt) = b.A;
    L.topRightCorner(nrt, np) = -b.B.transpose();
    L.bottomLeftCorner(np, nrt) = -b.B;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
    if (!lu.isInvertible()) throw AssemblyError("singular local Darcy block", b.cell);

    Eigen::MatrixXd rhs_lambda = Eigen::MatrixXd::Zero(nrt + np, m);
    rhs_lambda.topRows(nrt) = b.C;
    Eigen::VectorXd rhs_load = Eigen::VectorXd::Zero(nrt + np);
    rhs_load.tail(np) = b.g;
    const Eigen::MatrixXd X = lu.solve(rhs_lambda);
    const Eigen::VectorXd z = lu.solve(rhs_load);

    Eigen::MatrixXd S = b.C.transpose() * X.topRows(nrt);
    S = 0.5 * (S + S.transpose());
    const Eigen::VectorXd r = -b.C.transpose() * z.head(nrt);

    const std::vector<Index> dofs = cell_multiplier_dofs(spaces, b.cell);
    for (Index i = 0; i < m; ++i) {
      const Index gi = dofs[static_cast<std::size_t>(i)];
      if (gi == sys.pinned_dof) continue;
      sys.rhs[gi] += r[i];
      for (Index j = 0; j < m; ++j) {
        const Index gj = dofs[static_cast<std::size_t>(j)];
        if (gj == sys.pinned_dof) continue;
        sys.matrix.add(gi, gj, S(i, j));
      }
    }
    sys.recovery[static_cast<std::size_t>(b.cell)] = X;
    sys.recovery_offset[static_cast<std::size_t>(b.cell)] = z;
  }
  if (sys.pinned_dof >= 0) sys.matrix.add(sys.pinned_dof, sys.pinned_dof, 1.0);
  sys.matrix.finalize();
  return sys;
}

DarcySolution solve_darcy_step(const HybridSpaces& spaces, const DiscreteField& c_prev, const ProblemSpec& spec,
                               double t, const DarcyOptions& options) {
  const Mesh& mesh = *spaces.mesh;
  const QuadratureDegrees deg = QuadratureDegrees::for_degree(spaces.degree);
  const SourceBalance balance =
      source_balance(mesh, [&spec, t](const Eigen::Vector2d& x) { return spec.source(x, t); }, deg.load);
  if (std::abs(balance.integral) > std::max(1e-10, options.compat_tol * balance.abs_integral)) {
    throw PreconditionError("source is incompatible with the no-flow boundary: integral of q = " +
                            std::to_string(balance.integral) + " at t = " + std::to_string(t));
  }
  const ScalarFunction q = compatible_source(spec, t, balance);

  std::vector<LocalDarcyBlocks> blocks;
  blocks.reserve(static_cast<std::size_t>(mesh.num_cells()));
  for (Index c = 0; c < mesh.num_cells(); ++c) blocks.push_back(assemble_local_darcy(spaces, c, c_prev, spec, q));
  const CondensedSystem sys = condense_darcy(spaces, blocks, true);
  const SolveResult solved =
      factor_solve(sys.matrix, sys.rhs, MatrixKind::SymmetricPositiveDefinite, options.solver_tolerance);

  DarcySolution sol{DiscreteField(spaces.flux), DiscreteField(spaces.cell), DiscreteField(spaces.facet, solved.x),
                    solved.residual, balance};
  const Index nrt = spaces.flux->local_dofs();
  const Index np = spaces.cell->local_dofs();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const std::vector<Index> dofs = cell_multiplier_dofs(spaces, c);
    Eigen::VectorXd lam(static_cast<Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) lam[static_cast<Index>(i)] = solved.x[dofs[i]];
    const Eigen::VectorXd up =
        -sys.recovery[static_cast<std::size_t>(c)] * lam - sys.recovery_offset[static_cast<std::size_t>(c)];
    sol.u.local(c) = up.head(nrt);
    sol.p.local(c) = up.segment(nrt, np);
  }

  // Shift the constant mode so that the mean pressure equals the gauge value.
  double integral = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = mesh.cell_quadrature(c, deg.cell);
    integral += rule.weights.dot(eval_cell_basis(*spaces.cell, c, rule.points).value * sol.p.local(c));
  }
  const double shift = options.gauge_value - integral / mesh.total_area();
  for (Index c = 0; c < mesh.num_cells(); ++c) sol.p.local(c)[0] += shift;
  for (Index f = 0; f < mesh.num_facets(); ++f) sol.lambda.local(f)[0] += shift;
  return sol;
}

Eigen::VectorXd local_conservation_audit(const DiscreteField& u, const ScalarFunction& q, int quad_degree) {
  const Mesh& mesh = u.space->mesh();
  const int k = u.space->degree();
  Eigen::VectorXd residual(mesh.num_cells());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    double flux = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Index f = mesh.cell_facet(c, i);
      const FacetQuadrature fq = facet_quadrature(mesh, f, 2 * k + 1);
      flux += fq.weights.dot(eval_facet_trace(*u.space, f, c, fq.points) * u.local(c));
    }
    const QuadratureRule rule = mesh.cell_quadrature(c, quad_degree);
    double source = 0.0;
    for (Index j = 0; j < rule.size(); ++j) source += rule.weights[j] * q(rule.points.col(j));
    residual[c] = flux - source;
  }
  return residual;
}

namespace {

/// <w . n_K, mu_j>_e for every side of facet f, summed.
Eigen::VectorXd facet_flux_moments(const DiscreteField& w, Index f) {
  const Mesh& mesh = w.space->mesh();
  const int k = w.space->degree();
  const Facet& facet = mesh.facet(f);
  const FacetQuadrature fq = facet_quadrature(mesh, f, 2 * k + 1);
  const Eigen::MatrixXd mu = facet_basis(k, fq.params);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(k + 1);
  for (int s = 0; s < facet.num_sides; ++s) {
    const Index c = facet.sides[static_cast<std::size_t>(s)].cell;
    const Eigen::VectorXd trace = eval_facet_trace(*w.space, f, c, fq.points) * w.local(c);
    moments += mu.transpose() * trace.cwiseProduct(fq.weights);
  }
  return moments;
}

}  // namespace

double max_normal_jump(const DiscreteField& w) {
  if (w.space->kind() != SpaceKind::RTk) throw InvalidArgument("max_normal_jump: RT field expected");
  const Mesh& mesh = w.space->mesh();
  double worst = 0.0;
  for (Index f = 0; f < mesh.num_facets(); ++f)
    if (!mesh.facet(f).is_boundary()) worst = std::max(worst, facet_flux_moments(w, f).cwiseAbs().maxCoeff());
  return worst;
}

double max_boundary_flux(const DiscreteField& w) {
  if (w.space->kind() != SpaceKind::RTk) throw InvalidArgument("max_boundary_flux: RT field expected");
  const Mesh& mesh = w.space->mesh();
  double worst = 0.0;
  for (Index f = 0; f < mesh.num_facets(); ++f)
    if (mesh.facet(f).is_boundary()) worst = std::max(worst, facet_flux_moments(w, f).cwiseAbs().maxCoeff());
  return worst;
}

DarcyResiduals darcy_residuals(const HybridSpaces& spaces, const DarcySolution& solution,
                               const DiscreteField& c_prev, const ProblemSpec& spec, const ScalarFunction& q) {
  const Mesh& mesh = *spaces.mesh;
  Eigen::VectorXd continuity = Eigen::VectorXd::Zero(spaces.facet->dofs_total());
  double flux2 = 0.0, div2 = 0.0, g2 = 0.0, scale2 = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const LocalDarcyBlocks b = assemble_local_darcy(spaces, c, c_prev, spec, q);
    const std::vector<Index> dofs = cell_multiplier_dofs(spaces, c);
    Eigen::VectorXd lam(static_cast<Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) lam[static_cast<Index>(i)] = solution.lambda.coefficients[dofs[i]];
    const Eigen::VectorXd u = solution.u.local(c);
    const Eigen::VectorXd p = solution.p.local(c);
    flux2 += (b.A * u - b.B.transpose() * p + b.C * lam).squaredNorm();
    scale2 += (b.A * u).squaredNorm();
    div2 += (b.B * u - b.g).squaredNorm();
    g2 += b.g.squaredNorm();
    const Eigen::VectorXd cu = b.C.transpose() * u;
    for (std::size_t i = 0; i < dofs.size(); ++i) continuity[dofs[i]] += cu[static_cast<Index>(i)];
  }
  DarcyResiduals r;
  r.flux = std::sqrt(flux2) / std::max(std::sqrt(scale2), 1.0);
  r.divergence = std::sqrt(div2) / std::max(std::sqrt(g2), 1.0);
  r.continuity = continuity.norm();
  return r;
}

}  // namespace hmdg
