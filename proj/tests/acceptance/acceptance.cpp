// Acceptance gate: prints one PASS/FAIL line per criterion and writes the same
// lines to the file given by --results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "hmdg/darcy.hpp"
#include "hmdg/manufactured.hpp"
#include "hmdg/projections.hpp"
#include "hmdg/transport.hpp"
#include "hmdg/verify.hpp"

using namespace hmdg;
using Eigen::Matrix2d;
using Eigen::Vector2d;

namespace {

struct Verdict {
  int criterion;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

std::string fmt(const char* format, double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, v);
  return buffer;
}

void report(int criterion, bool pass, const std::string& detail) {
  verdicts.push_back({criterion, pass, detail});
  std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const Mesh> unit_mesh(int nx) { return std::make_shared<const Mesh>(build_structured_mesh(nx)); }

double min_order(const ConvergenceReport& r, double FieldErrors::*member) {
  double m = INFINITY;
  for (double o : r.orders(member)) m = std::min(m, std::isnan(o) ? -INFINITY : o);
  return m;
}

std::string orders_text(const ConvergenceReport& r, double FieldErrors::*member) {
  std::string s;
  for (double o : r.orders(member)) s += (s.empty() ? "" : "/") + fmt("%.3f", o);
  return s;
}

AuditSummary worst(const std::vector<AuditSummary>& all) {
  AuditSummary w;
  for (const AuditSummary& a : all) {
    w.darcy_conservation = std::max(w.darcy_conservation, a.darcy_conservation);
    w.transport_conservation = std::max(w.transport_conservation, a.transport_conservation);
    w.darcy_flux_jump = std::max(w.darcy_flux_jump, a.darcy_flux_jump);
    w.sigma_jump = std::max(w.sigma_jump, a.sigma_jump);
    w.total_flux_jump = std::max(w.total_flux_jump, a.total_flux_jump);
    w.coercivity_defect = std::max(w.coercivity_defect, a.coercivity_defect);
    w.max_mass_step_drift = std::max(w.max_mass_step_drift, a.max_mass_step_drift);
  }
  return w;
}

// Spatial study for k = 0 and 1; also feeds the conservation, jump and
// coercivity checks.
struct SpatialRuns {
  ConvergenceReport k0, k1;
  double seconds = 0.0;
};

SpatialRuns spatial_study() {
  const auto t0 = std::chrono::steady_clock::now();
  const ManufacturedCase mc = cosine_case();
  SpatialRuns r;
  r.k1 = run_convergence_study(mc, 1, {4, 8, 16, 32}, DtRule::SquareOfH);
  r.k0 = run_convergence_study(mc, 0, {4, 8, 16, 32}, DtRule::SquareOfH);
  r.seconds = seconds_since(t0);
  return r;
}

void criterion_1(const SpatialRuns& r) {
  bool pass = r.seconds <= 600.0;
  for (const ConvergenceReport* rep : {&r.k0, &r.k1})
    for (const LevelResult& l : rep->levels) pass = pass && !l.failed;
  const double need1 = 1.8, need0 = 0.8;
  for (auto m : {&FieldErrors::u, &FieldErrors::p, &FieldErrors::c}) {
    pass = pass && min_order(r.k1, m) >= need1 && min_order(r.k0, m) >= need0;
  }
  std::string d = "k=1 orders u " + orders_text(r.k1, &FieldErrors::u) + " p " + orders_text(r.k1, &FieldErrors::p) +
                  " c " + orders_text(r.k1, &FieldErrors::c) + "; k=0 orders u " + orders_text(r.k0, &FieldErrors::u) +
                  " p " + orders_text(r.k0, &FieldErrors::p) + " c " + orders_text(r.k0, &FieldErrors::c) +
                  "; runtime " + fmt("%.1f s", r.seconds);
  report(1, pass, d);
}

void criterion_2() {
  CosineCaseParameters prm;
  prm.final_time = 1.0;
  prm.dt = 0.1;
  const TemporalReport t = run_temporal_study(cosine_case(prm), 1, 32, {0.1, 0.05, 0.025, 0.0125});
  bool pass = !t.orders.empty();
  std::string d = "successive-difference orders";
  for (double o : t.orders) {
    pass = pass && std::abs(o - 1.0) <= 0.2;
    d += " " + fmt("%.3f", o);
  }
  d += "; errors vs closed form";
  for (double e : t.c_error) d += " " + fmt("%.3e", e);
  report(2, pass, d);
}

void criterion_3(const SpatialRuns& r) {
  const double o1 = min_order(r.k1, &FieldErrors::lambda);
  const double o0 = min_order(r.k0, &FieldErrors::lambda);
  report(3, o1 >= 1.8 && o0 >= 0.8,
         "lambda orders k=1 " + orders_text(r.k1, &FieldErrors::lambda) + ", k=0 " +
             orders_text(r.k0, &FieldErrors::lambda));
}

AuditSummary closed_system_audit() {
  ProblemSpec spec;
  spec.viscosity = {ViscosityModel::Kind::QuarterPowerMixing, 1.0, 4.0};
  spec.d_m = 1e-3;
  spec.d_l = 0.1;
  spec.d_t = 0.01;
  spec.initial_concentration = [](const Vector2d& x) { return x.x() + x.y() < 0.7 ? 1.0 : 0.0; };
  spec.final_time = 0.1;
  spec.dt = 0.01;
  return summarize_audits(run(spec, unit_mesh(16), 1));
}

AuditSummary five_spot_audit() {
  ProblemSpec spec;
  spec.viscosity = {ViscosityModel::Kind::QuarterPowerMixing, 1.0, 4.0};
  spec.d_m = 1e-3;
  spec.d_l = 0.05;
  spec.d_t = 0.005;
  spec.source = [](const Vector2d& x, double) {
    return 20.0 * (std::exp(-(x - Vector2d(0.1, 0.1)).squaredNorm() / 0.005) -
                   std::exp(-(x - Vector2d(0.9, 0.9)).squaredNorm() / 0.005));
  };
  spec.injected_concentration = [](const Vector2d&, double) { return 1.0; };
  spec.final_time = 0.1;
  spec.dt = 0.01;
  return summarize_audits(run(spec, unit_mesh(16), 1));
}

std::vector<AuditSummary> all_audits(const SpatialRuns& r) {
  std::vector<AuditSummary> out;
  for (const ConvergenceReport* rep : {&r.k0, &r.k1})
    for (const LevelResult& l : rep->levels) out.push_back(l.audits);
  return out;
}

void criterion_4(const SpatialRuns& r, const AuditSummary& closed, const AuditSummary& five_spot) {
  std::vector<AuditSummary> all = all_audits(r);
  all.push_back(five_spot);
  all.push_back(closed);
  const AuditSummary w = worst(all);
  const bool pass = w.darcy_conservation <= 1e-10 && w.transport_conservation <= 1e-10 &&
                    closed.max_mass_step_drift <= 1e-10;
  report(4, pass,
         "max per-cell residual darcy " + fmt("%.2e", w.darcy_conservation) + " transport " +
             fmt("%.2e", w.transport_conservation) + "; closed-system mass drift per step " +
             fmt("%.2e", closed.max_mass_step_drift));
}

void criterion_5(const SpatialRuns& r, const AuditSummary& five_spot) {
  std::vector<AuditSummary> all = all_audits(r);
  all.push_back(five_spot);
  const AuditSummary w = worst(all);
  std::string sigma_levels;
  for (const LevelResult& l : r.k1.levels) sigma_levels += (sigma_levels.empty() ? "" : "/") + fmt("%.1e", l.audits.sigma_jump);
  report(5, w.darcy_flux_jump <= 1e-10 && w.sigma_jump <= 1e-10,
         "max u.n jump " + fmt("%.2e", w.darcy_flux_jump) + ", max sigma.n jump " + fmt("%.2e", w.sigma_jump) +
             " (k=1 by level " + sigma_levels + "), max total-flux jump " + fmt("%.2e", w.total_flux_jump));
}

void criterion_6() {
  const ManufacturedCase mc = cosine_case();
  bool monotone = true;
  std::string d = "smooth case darcy/transport";
  for (int k : {0, 1}) {
    double prev_d = INFINITY, prev_t = INFINITY;
    for (int nx : {4, 8, 16}) {
      const ConsistencyResidual c = consistency_residual(mc, unit_mesh(nx), k, 0.1, 1.0 / (nx * nx));
      monotone = monotone && c.darcy.all() < prev_d && c.transport.all() < prev_t;
      prev_d = c.darcy.all();
      prev_t = c.transport.all();
      d += " " + fmt("%.2e", c.darcy.all()) + "/" + fmt("%.2e", c.transport.all());
    }
  }
  // Exact linear fields: all rows with u = 0, interior rows under uniform flow
  // (its boundary rows carry u . n != 0).
  const ConsistencyResidual rest =
      consistency_residual(linear_case(Vector2d::Zero(), 0.3, Vector2d::Zero(), 0.0), unit_mesh(4), 1, 0.1, 0.01);
  const ConsistencyResidual flow = consistency_residual(
      linear_case(Vector2d(1.0, 0.0), 0.0, Vector2d(1.0, 0.0), 0.0), unit_mesh(4), 1, 0.1, 0.01);
  const double poly = std::max({rest.darcy.all(), rest.transport.all(), flow.darcy.interior(), flow.transport.interior()});
  report(6, monotone && poly <= 1e-11, d + "; polynomial case " + fmt("%.2e", poly));
}

void criterion_7() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coef(0.0, 2.0), dm(1e-2, 1.0), phi_d(0.05, 1.0), angle(0.0, 2.0 * M_PI),
      logs(-6.0, 2.0), jitter(-1.0, 1.0);
  auto random_vector = [&]() {
    const double r = std::pow(10.0, logs(rng));
    const double a = angle(rng);
    return Vector2d(r * std::cos(a), r * std::sin(a));
  };
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0, worst_e = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double d_m = dm(rng), d_l = coef(rng), d_t = coef(rng), phi = phi_d(rng);
    const Vector2d u = random_vector(), v = random_vector();
    const Matrix2d S = phi * dispersion(u, phi, d_m, d_l, d_t).inverse;  // (D / phi)^{-1}
    const double form = v.dot(S * v);
    // (a) lower bound, (b) upper bound, as violations relative to the bound.
    worst_a = std::max(worst_a, v.squaredNorm() / (d_m + std::max(d_l, d_t) * u.norm()) / form - 1.0);
    worst_b = std::max(worst_b, form / (v.squaredNorm() / d_m) - 1.0);
    // (c) Lipschitz continuity of the inverse.
    const Vector2d w = (i % 2 == 0) ? random_vector() : Vector2d(u + 1e-3 * Vector2d(jitter(rng), jitter(rng)));
    const Matrix2d diff = dispersion(u, 1.0, d_m, d_l, d_t).inverse - dispersion(w, 1.0, d_m, d_l, d_t).inverse;
    const double bound = (7.0 * d_t + 6.0 * d_l) * std::pow(2.0, 1.5) * (u - w).norm() / (d_m * d_m);
    if (bound > 0.0) worst_c = std::max(worst_c, diff.norm() / bound);
    const Matrix2d E = projection_along(u);
    worst_e = std::max({worst_e, (E * E - E).cwiseAbs().maxCoeff(), (E - E.transpose()).cwiseAbs().maxCoeff()});
  }
  const bool pass = worst_a <= 1e-12 && worst_b <= 1e-12 && worst_c <= 1.0 + 1e-12 && worst_e <= 1e-13;
  report(7, pass,
         "10000 samples: (a) excess " + fmt("%.1e", worst_a) + ", (b) excess " + fmt("%.1e", worst_b) +
             ", (c) max ratio " + fmt("%.3f", worst_c) + ", E defect " + fmt("%.1e", worst_e));
}

double fitted_rate(const std::vector<double>& h, const std::vector<double>& e) {
  return std::log(e.front() / e.back()) / std::log(h.front() / h.back());
}

void criterion_8() {
  // Dense oracles on one- and two-cell meshes.
  double dense = 0.0;
  const std::vector<std::shared_ptr<const Mesh>> meshes{
      oracle::single_triangle(Vector2d(0, 0), Vector2d(1, 0.1), Vector2d(0.3, 1)), unit_mesh(1)};
  for (const auto& mesh : meshes) {
    for (int k : {0, 1}) {
      const HybridSpaces s = HybridSpaces::create(mesh, k);
      ProblemSpec spec;
      spec.viscosity = {ViscosityModel::Kind::QuarterPowerMixing, 1.0, 3.0};
      spec.d_m = 1e-2;
      spec.d_l = 0.5;
      spec.d_t = 0.05;
      spec.source = [](const Vector2d& x, double) { return std::sin(3.0 * x.x()) + x.y() * x.y(); };
      spec.injected_concentration = [](const Vector2d&, double) { return 0.8; };
      DarcyOptions opt;
      opt.compat_tol = 1.0;
      const DiscreteField c_prev = project_cell([](const Vector2d& x) { return 0.2 + 0.5 * x.x() * x.y(); }, s.cell);
      const DarcySolution flow = solve_darcy_step(s, c_prev, spec, 0.05, opt);
      const ScalarFunction q = compatible_source(spec, 0.05, flow.source);
      const DarcySolution dref = oracle::solve_dense_darcy(s, oracle::dense_darcy(s, c_prev, spec, q));
      dense = std::max({dense, oracle::relative_difference(flow.u.coefficients, dref.u.coefficients),
                        oracle::relative_difference(flow.p.coefficients, dref.p.coefficients),
                        oracle::relative_difference(flow.lambda.coefficients, dref.lambda.coefficients)});
      spec.dt = 0.05;
      const TransportStepData data = make_step_data(spec, q, 0.05);
      const UpwindTable table = build_upwind_table(flow.u, QuadratureDegrees::for_degree(k).facet);
      const TransportSolution tr = solve_transport_step(s, c_prev, flow.u, table, spec, data);
      const TransportSolution tref =
          oracle::solve_dense_transport(s, oracle::dense_transport(s, c_prev, flow.u, table, spec, data));
      dense = std::max({dense, oracle::relative_difference(tr.sigma.coefficients, tref.sigma.coefficients),
                        oracle::relative_difference(tr.c.coefficients, tref.c.coefficients),
                        oracle::relative_difference(tr.lambda.coefficients, tref.lambda.coefficients)});
    }
  }

  // Polynomial reproduction by the projections.
  double reproduction = 0.0;
  {
    const auto mesh = unit_mesh(3);
    const ScalarFunction linear = [](const Vector2d& x) { return 0.3 + 2.0 * x.x() - x.y(); };
    const VectorFunction rt1 = [](const Vector2d& x) { return Vector2d(1.0 + x.x(), -2.0 + x.y()); };
    const VectorFunction p1 = [](const Vector2d& x) { return Vector2d(1.0 + 2.0 * x.y(), x.x() - 0.5); };
    const auto cell1 = std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, 1);
    const auto facet1 = std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, 1);
    const auto rt = std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, 1);
    reproduction = std::max({cell_l2_error(project_cell(linear, cell1), linear, 8),
                             facet_l2_error(project_facet(linear, facet1), linear, 8),
                             vector_l2_error(interpolate_rt(rt1, rt), rt1, 8),
                             vector_l2_error(interpolate_rt(p1, rt), p1, 8)});
  }

  // Approximation rates on a smooth field.
  const ScalarFunction smooth = [](const Vector2d& x) { return std::sin(2.0 * x.x() + 1.0) * std::exp(x.y()); };
  const VectorFunction wsmooth = [](const Vector2d& x) {
    return Vector2d(std::cos(x.x() + 2.0 * x.y()), std::sin(1.5 * x.x()) * x.y());
  };
  bool rates_ok = true;
  std::string rates;
  for (int k : {0, 1}) {
    std::vector<double> h, ec, ef, er;
    for (int nx : {4, 8, 16, 32}) {
      const auto mesh = unit_mesh(nx);
      h.push_back(1.0 / nx);
      ec.push_back(cell_l2_error(project_cell(smooth, std::make_shared<const FeSpace>(mesh, SpaceKind::CellPk, k)), smooth, 8));
      // Facet error scaled by h^{1/2}, matching the cell norm.
      ef.push_back(std::sqrt(1.0 / nx) *
                   facet_l2_error(project_facet(smooth, std::make_shared<const FeSpace>(mesh, SpaceKind::FacetPk, k)), smooth, 8));
      er.push_back(vector_l2_error(interpolate_rt(wsmooth, std::make_shared<const FeSpace>(mesh, SpaceKind::RTk, k)), wsmooth, 8));
    }
    const double rc = fitted_rate(h, ec), rf = fitted_rate(h, ef), rr = fitted_rate(h, er);
    for (double r : {rc, rf, rr}) rates_ok = rates_ok && std::abs(r - (k + 1)) <= 0.2;
    rates += " k=" + std::to_string(k) + " cell " + fmt("%.2f", rc) + " facet " + fmt("%.2f", rf) + " rt " + fmt("%.2f", rr);
  }
  report(8, dense <= 1e-9 && reproduction <= 1e-12 && rates_ok,
         "dense oracle max rel diff " + fmt("%.1e", dense) + "; reproduction " + fmt("%.1e", reproduction) +
             "; rates" + rates);
}

void criterion_9(const SpatialRuns& r, const AuditSummary& closed, const AuditSummary& five_spot) {
  std::vector<AuditSummary> all = all_audits(r);
  all.push_back(closed);
  all.push_back(five_spot);
  const double w = worst(all).coercivity_defect;
  report(9, w <= 1e-9, "max relative defect over every step " + fmt("%.2e", w));
}

void criterion_10() {
  const DofCounts d = dof_counts(build_structured_mesh(32), 1);
  report(10, d.ratio() < 0.4,
         "multiplier " + std::to_string(d.multiplier) + " / eliminated " + std::to_string(d.eliminated) + " = " +
             fmt("%.3f", d.ratio()));
}

}  // namespace

int main(int argc, char** argv) {
  std::string results;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--results") results = argv[i + 1];

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SpatialRuns spatial = spatial_study();
    const AuditSummary closed = closed_system_audit();
    const AuditSummary five_spot = five_spot_audit();
    criterion_1(spatial);
    criterion_2();
    criterion_3(spatial);
    criterion_4(spatial, closed, five_spot);
    criterion_5(spatial, five_spot);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(spatial, closed, five_spot);
    criterion_10();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
  }
  std::printf("total time %.1f s\n", seconds_since(t0));

  if (!results.empty()) {
    std::ofstream out(results);
    for (const Verdict& v : verdicts)
      out << "criterion " << v.criterion << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << '\n';
  }
  int failed = 0;
  for (const Verdict& v : verdicts) failed += v.pass ? 0 : 1;
  std::printf("%zu criteria reported, %d failed\n", verdicts.size(), failed);
  return 0;
}
