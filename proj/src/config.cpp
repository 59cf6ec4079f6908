#include "hmdg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "hmdg/errors.hpp"

namespace hmdg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct Line {
  int number;
  std::string key;
  std::string value;
};

[[noreturn]] void fail(const Line& line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line.number) + " (" + line.key + "): " + message);
}

double to_double(const Line& line) {
  double v = 0.0;
  const char* first = line.value.data();
  const char* last = first + line.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail(line, "expected a number, got '" + line.value + "'");
  return v;
}

int to_int(const Line& line) {
  int v = 0;
  const char* first = line.value.data();
  const char* last = first + line.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(line, "expected an integer, got '" + line.value + "'");
  return v;
}

bool to_bool(const Line& line) {
  if (line.value == "true" || line.value == "1" || line.value == "yes") return true;
  if (line.value == "false" || line.value == "0" || line.value == "no") return false;
  fail(line, "expected true or false");
}

std::string one_of(const Line& line, std::initializer_list<const char*> choices) {
  std::string list;
  for (const char* c : choices) {
    if (line.value == c) return line.value;
    list += list.empty() ? c : std::string(", ") + c;
  }
  fail(line, "expected one of " + list);
}

template <typename T, typename Convert>
std::vector<T> to_list(const Line& line, Convert convert) {
  std::vector<T> out;
  std::stringstream ss(line.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(convert(Line{line.number, line.key, trim(item)}));
  if (out.empty()) fail(line, "expected a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig&, const Line&, const std::filesystem::path&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"problem", [](RunConfig& c, const Line& l, auto&) { c.problem = one_of(l, {"mms", "custom"}); }},
      {"mesh",
       [](RunConfig& c, const Line& l, const std::filesystem::path& base) {
         c.mesh = l.value == "structured" ? l.value : (base / l.value).string();
       }},
      {"nx", [](RunConfig& c, const Line& l, auto&) { c.nx = to_int(l); }},
      {"degree", [](RunConfig& c, const Line& l, auto&) { c.degree = to_int(l); }},
      {"final_time", [](RunConfig& c, const Line& l, auto&) { c.final_time = to_double(l); }},
      {"dt", [](RunConfig& c, const Line& l, auto&) { c.dt = to_double(l); }},
      {"viscosity",
       [](RunConfig& c, const Line& l, auto&) { c.viscosity = one_of(l, {"constant", "quarter_power_mixing"}); }},
      {"mu0", [](RunConfig& c, const Line& l, auto&) { c.mu0 = to_double(l); }},
      {"mobility_ratio", [](RunConfig& c, const Line& l, auto&) { c.mobility_ratio = to_double(l); }},
      {"porosity", [](RunConfig& c, const Line& l, auto&) { c.porosity = to_double(l); }},
      {"permeability", [](RunConfig& c, const Line& l, auto&) { c.permeability = to_double(l); }},
      {"d_m", [](RunConfig& c, const Line& l, auto&) { c.d_m = to_double(l); }},
      {"d_l", [](RunConfig& c, const Line& l, auto&) { c.d_l = to_double(l); }},
      {"d_t", [](RunConfig& c, const Line& l, auto&) { c.d_t = to_double(l); }},
      {"source", [](RunConfig& c, const Line& l, auto&) { c.source = one_of(l, {"none", "quarter_five_spot"}); }},
      {"source_rate", [](RunConfig& c, const Line& l, auto&) { c.source_rate = to_double(l); }},
      {"source_width", [](RunConfig& c, const Line& l, auto&) { c.source_width = to_double(l); }},
      {"injected_concentration", [](RunConfig& c, const Line& l, auto&) { c.injected_concentration = to_double(l); }},
      {"initial_concentration", [](RunConfig& c, const Line& l, auto&) { c.initial_concentration = to_double(l); }},
      {"upwind",
       [](RunConfig& c, const Line& l, auto&) {
         c.options.transport.upwind =
             one_of(l, {"pointwise", "facet_mean"}) == "pointwise" ? UpwindMode::Pointwise : UpwindMode::FacetMean;
       }},
      {"production_closure",
       [](RunConfig& c, const Line& l, auto&) {
         c.options.transport.production = one_of(l, {"implicit", "explicit"}) == "implicit"
                                              ? ProductionClosure::Implicit
                                              : ProductionClosure::Explicit;
       }},
      {"darcy_tolerance", [](RunConfig& c, const Line& l, auto&) { c.options.darcy.solver_tolerance = to_double(l); }},
      {"transport_tolerance",
       [](RunConfig& c, const Line& l, auto&) { c.options.transport.solver_tolerance = to_double(l); }},
      {"gauge", [](RunConfig& c, const Line& l, auto&) { c.options.darcy.gauge_value = to_double(l); }},
      {"compat_tol", [](RunConfig& c, const Line& l, auto&) { c.options.darcy.compat_tol = to_double(l); }},
      {"audit_coercivity", [](RunConfig& c, const Line& l, auto&) { c.options.audit_coercivity = to_bool(l); }},
      {"study", [](RunConfig& c, const Line& l, auto&) { c.study = one_of(l, {"spatial", "temporal"}); }},
      {"levels", [](RunConfig& c, const Line& l, auto&) { c.levels = to_list<int>(l, to_int); }},
      {"dt_rule",
       [](RunConfig& c, const Line& l, auto&) {
         c.dt_rule = one_of(l, {"h_squared", "fixed"}) == "h_squared" ? DtRule::SquareOfH : DtRule::Fixed;
       }},
      {"temporal_dts", [](RunConfig& c, const Line& l, auto&) { c.temporal_dts = to_list<double>(l, to_double); }},
      {"temporal_nx", [](RunConfig& c, const Line& l, auto&) { c.temporal_nx = to_int(l); }},
      {"output",
       [](RunConfig& c, const Line& l, const std::filesystem::path& base) { c.output = base / l.value; }},
      {"snapshot_dir",
       [](RunConfig& c, const Line& l, const std::filesystem::path& base) { c.snapshot_dir = base / l.value; }},
      {"snapshot_stride", [](RunConfig& c, const Line& l, auto&) { c.snapshot_stride = to_int(l); }},
  };
  return table;
}

void validate(const RunConfig& c) {
  if (c.degree != 0 && c.degree != 1) throw ConfigError("degree must be 0 or 1");
  if (c.nx < 1) throw ConfigError("nx must be at least 1");
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.final_time >= 0.0)) throw ConfigError("final_time must be non-negative");
  if (!(c.d_m > 0.0)) throw ConfigError("d_m must be positive");
  if (c.d_l < 0.0 || c.d_t < 0.0) throw ConfigError("d_l and d_t must be non-negative");
  if (!(c.porosity > 0.0)) throw ConfigError("porosity must be positive");
  if (!(c.permeability > 0.0)) throw ConfigError("permeability must be positive");
  if (!(c.mu0 > 0.0) || !(c.mobility_ratio > 0.0)) throw ConfigError("mu0 and mobility_ratio must be positive");
  if (c.snapshot_stride < 0) throw ConfigError("snapshot_stride must be non-negative");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::set<std::string> seen;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    const Line line{number, trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
    if (line.key.empty() || line.value.empty())
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == line.key; });
    if (it == table.end()) {
      std::string valid;
      for (const std::string& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
      fail(line, "unknown key; valid keys are: " + valid);
    }
    if (!seen.insert(line.key).second) fail(line, "duplicate key");
    it->second(config, line, base_dir);
  }
  config.keys_set = std::move(seen);
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

std::optional<ManufacturedCase> build_case(const RunConfig& c) {
  if (c.problem != "mms") return std::nullopt;
  CosineCaseParameters prm = c.mms;
  const auto set = [&c](const char* key) { return c.keys_set.count(key) > 0; };
  if (set("mobility_ratio")) prm.mobility_ratio = c.mobility_ratio;
  if (set("mu0")) prm.mu0 = c.mu0;
  if (set("permeability")) prm.permeability = c.permeability;
  if (set("porosity")) prm.porosity = c.porosity;
  if (set("d_m")) prm.d_m = c.d_m;
  if (set("d_l")) prm.d_l = c.d_l;
  if (set("d_t")) prm.d_t = c.d_t;
  prm.final_time = c.final_time;
  prm.dt = c.dt;
  return cosine_case(prm);
}

ProblemSpec build_problem(const RunConfig& c) {
  if (auto mcase = build_case(c)) return mcase->spec;
  ProblemSpec spec;
  const double phi = c.porosity;
  const double kperm = c.permeability;
  spec.porosity = [phi](const Eigen::Vector2d&) { return phi; };
  spec.permeability = [kperm](const Eigen::Vector2d&) { return kperm; };
  spec.viscosity = {c.viscosity == "constant" ? ViscosityModel::Kind::Constant
                                              : ViscosityModel::Kind::QuarterPowerMixing,
                    c.mu0, c.mobility_ratio};
  if (c.source == "quarter_five_spot") {
    const double rate = c.source_rate;
    const double w2 = 2.0 * c.source_width * c.source_width;
    spec.source = [rate, w2](const Eigen::Vector2d& x, double) {
      const double inject = std::exp(-(x - Eigen::Vector2d(0.1, 0.1)).squaredNorm() / w2);
      const double produce = std::exp(-(x - Eigen::Vector2d(0.9, 0.9)).squaredNorm() / w2);
      return rate * (inject - produce);
    };
  }
  const double injected = c.injected_concentration;
  spec.injected_concentration = [injected](const Eigen::Vector2d&, double) { return injected; };
  const double initial = c.initial_concentration;
  spec.initial_concentration = [initial](const Eigen::Vector2d&) { return initial; };
  spec.d_m = c.d_m;
  spec.d_l = c.d_l;
  spec.d_t = c.d_t;
  spec.final_time = c.final_time;
  spec.dt = c.dt;
  return spec;
}

std::shared_ptr<const Mesh> build_mesh(const RunConfig& c, std::vector<std::string>* warnings) {
  if (c.mesh == "structured") return std::make_shared<const Mesh>(build_structured_mesh(c.nx));
  if (!std::filesystem::exists(c.mesh)) throw ConfigError("mesh file not found: " + c.mesh);
  return std::make_shared<const Mesh>(load_mesh(c.mesh, warnings));
}

}  // namespace hmdg
