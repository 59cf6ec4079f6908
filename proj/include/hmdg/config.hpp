#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hmdg/coupler.hpp"
#include "hmdg/manufactured.hpp"
#include "hmdg/mesh.hpp"
#include "hmdg/verify.hpp"

namespace hmdg {

/// Everything a CLI run needs, filled from `key = value` lines.
struct RunConfig {
  // problem = mms | custom
  std::string problem = "mms";
  CosineCaseParameters mms;

  // custom problem
  std::string viscosity = "constant";  // constant | quarter_power_mixing
  double mu0 = 1.0;
  double mobility_ratio = 1.0;
  double porosity = 1.0;
  double permeability = 1.0;
  double d_m = 1e-2;
  double d_l = 0.0;
  double d_t = 0.0;
  std::string source = "none";  // none | quarter_five_spot
  double source_rate = 1.0;
  double source_width = 0.05;
  double injected_concentration = 1.0;
  double initial_concentration = 0.0;
  double final_time = 0.1;
  double dt = 0.01;

  // discretization
  std::string mesh = "structured";  // structured | path to a mesh file
  int nx = 8;
  int degree = 1;
  SimulationOptions options;

  // studies
  std::string study = "spatial";  // spatial | temporal
  std::vector<int> levels{4, 8, 16, 32};
  DtRule dt_rule = DtRule::SquareOfH;
  std::vector<double> temporal_dts{0.1, 0.05, 0.025, 0.0125};
  int temporal_nx = 32;

  // output
  std::filesystem::path output = "hmdg.csv";
  std::filesystem::path snapshot_dir;
  int snapshot_stride = 0;

  /// Keys present in the parsed file. Coefficient keys override the
  /// manufactured-case defaults only when listed here.
  std::set<std::string> keys_set;
};

/// Names accepted by `parse_config`, in documentation order.
const std::vector<std::string>& config_keys();

/// Parses the config grammar: `key = value` per line, `#` starts a comment,
/// blank lines ignored. Throws ConfigError naming the line for malformed lines,
/// bad values, duplicates and unknown keys (listing the valid keys).
/// Relative paths are resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Problem data; for problem = mms the manufactured case is returned as well.
ProblemSpec build_problem(const RunConfig& config);
std::optional<ManufacturedCase> build_case(const RunConfig& config);
std::shared_ptr<const Mesh> build_mesh(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

}  // namespace hmdg
