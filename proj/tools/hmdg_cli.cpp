// Command-line front end: solve, convergence and audit runs driven by a
// key = value config file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hmdg/config.hpp"
#include "hmdg/coupler.hpp"
#include "hmdg/errors.hpp"
#include "hmdg/verify.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw hmdg::ConfigError("cannot open output file " + path.string());
  return out;
}

hmdg::StepObserver snapshot_writer(const hmdg::RunConfig& config) {
  if (config.snapshot_stride <= 0) return {};
  std::filesystem::create_directories(config.snapshot_dir.empty() ? "." : config.snapshot_dir);
  return [config](const hmdg::SimulationState& state) {
    if (state.step % config.snapshot_stride != 0 && state.step != state.total_steps) return;
    char name[32];
    std::snprintf(name, sizeof name, "step_%05d.vtk", state.step);
    hmdg::write_vtk(state, config.snapshot_dir / name);
  };
}

void print_summary(const hmdg::SimulationState& state) {
  const hmdg::AuditSummary s = hmdg::summarize_audits(state);
  std::printf("steps %d  t %.6g\n", state.step, state.t);
  std::printf("max darcy conservation residual      %.3e\n", s.darcy_conservation);
  std::printf("max transport conservation residual  %.3e\n", s.transport_conservation);
  std::printf("max u.n jump                         %.3e\n", s.darcy_flux_jump);
  std::printf("max sigma.n jump                     %.3e\n", s.sigma_jump);
  std::printf("max total flux jump                  %.3e\n", s.total_flux_jump);
  std::printf("max coercivity identity defect       %.3e\n", s.coercivity_defect);
  std::printf("mass ledger defect                   %.3e\n", s.mass_ledger_defect);
}

int cmd_solve(const hmdg::RunConfig& config) {
  std::vector<std::string> warnings;
  auto mesh = hmdg::build_mesh(config, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  const hmdg::ProblemSpec spec = hmdg::build_problem(config);
  const hmdg::SimulationState state = hmdg::run(spec, mesh, config.degree, config.options, snapshot_writer(config));
  std::ofstream out = open_output(config.output);
  hmdg::write_audit_csv(state, out);
  print_summary(state);
  return 0;
}

int cmd_convergence(hmdg::RunConfig config, int levels) {
  const auto mcase = hmdg::build_case(config);
  if (!mcase) throw hmdg::ConfigError("convergence studies require problem = mms");
  std::ofstream out = open_output(config.output);
  if (config.study == "temporal") {
    if (levels > 0) {
      std::vector<double> dts;
      for (int i = 0; i < levels; ++i) dts.push_back(config.temporal_dts.front() / (1 << i));
      config.temporal_dts = dts;
    }
    const hmdg::TemporalReport report =
        hmdg::run_temporal_study(*mcase, config.degree, config.temporal_nx, config.temporal_dts, config.options);
    hmdg::write_temporal_csv(report, out);
    for (std::size_t i = 0; i < report.orders.size(); ++i) std::printf("temporal order %zu: %.3f\n", i + 1, report.orders[i]);
    return 0;
  }
  if (levels > 0) {
    std::vector<int> nx;
    for (int i = 0; i < levels; ++i) nx.push_back(config.levels.front() << i);
    config.levels = nx;
  }
  const hmdg::ConvergenceReport report =
      hmdg::run_convergence_study(*mcase, config.degree, config.levels, config.dt_rule, config.options);
  hmdg::write_convergence_csv(report, out);
  int status = 0;
  for (const hmdg::LevelResult& level : report.levels) {
    std::printf("nx %3d  err_u %.3e  err_p %.3e  err_c %.3e  %s\n", level.nx, level.errors.u, level.errors.p,
                level.errors.c, level.failed ? level.failure.c_str() : "");
    if (level.failed) status = kExitSolver;
  }
  return status;
}

int cmd_audit(const hmdg::RunConfig& config) {
  const int status = cmd_solve(config);
  if (const auto mcase = hmdg::build_case(config)) {
    auto mesh = hmdg::build_mesh(config);
    const double t = std::max(config.dt, config.final_time);
    const hmdg::ConsistencyResidual r = hmdg::consistency_residual(*mcase, mesh, config.degree, t, config.dt);
    std::printf("consistency residual (pressure system)   %.3e\n", r.darcy.all());
    std::printf("consistency residual (transport system)  %.3e\n", r.transport.all());
  }
  const auto mesh = hmdg::build_mesh(config);
  const hmdg::DofCounts dofs = hmdg::dof_counts(*mesh, config.degree);
  std::printf("multiplier dofs %lld of %lld eliminated (ratio %.3f)\n", static_cast<long long>(dofs.multiplier),
              static_cast<long long>(dofs.eliminated), dofs.ratio());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid mixed DG solver for miscible displacement"};
  app.require_subcommand(1);
  std::string config_path;
  int levels = 0;
  CLI::App* solve = app.add_subcommand("solve", "run the coupled scheme to the final time");
  CLI::App* convergence = app.add_subcommand("convergence", "refinement study on the manufactured solution");
  CLI::App* audit = app.add_subcommand("audit", "solve and report conservation and consistency audits");
  for (CLI::App* sub : {solve, convergence, audit}) sub->add_option("--config", config_path, "config file")->required();
  convergence->add_option("--levels", levels, "number of refinement levels")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const hmdg::RunConfig config = hmdg::load_config(config_path);
    if (solve->parsed()) return cmd_solve(config);
    if (convergence->parsed()) return cmd_convergence(config, levels);
    return cmd_audit(config);
  } catch (const hmdg::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmdg::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmdg::TopologyError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmdg::InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmdg::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const hmdg::AssemblyError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}
