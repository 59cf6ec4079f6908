#include "hmdg/coefficients.hpp"

#include <sstream>

namespace hmdg {

int time_step_count(const ProblemSpec& spec) {
  if (!(spec.dt > 0.0)) throw ConfigError("time step dt must be positive");
  if (spec.final_time < 0.0) throw ConfigError("final time T must be non-negative");
  const double ratio = spec.final_time / spec.dt;
  const double steps = std::round(ratio);
  if (std::abs(steps - ratio) > 1e-12 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "dt must divide T: T / dt = " << ratio << " is not an integer";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(steps);
}

void validate_problem(const ProblemSpec& spec, const Eigen::Matrix2Xd& sample_points) {
  if (!(spec.d_m > 0.0)) throw ConfigError("molecular diffusion d_m must be positive");
  if (spec.d_l < 0.0 || spec.d_t < 0.0) throw ConfigError("dispersion coefficients d_l, d_t must be non-negative");
  for (Eigen::Index i = 0; i < sample_points.cols(); ++i) {
    const Eigen::Vector2d x = sample_points.col(i);
    if (!(spec.porosity(x) > 0.0)) throw ConfigError("porosity must be positive");
    if (!(spec.permeability(x) > 0.0)) throw ConfigError("permeability must be positive");
  }
  for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    if (!(spec.viscosity(c) > 0.0)) throw ConfigError("viscosity must be positive on [0, 1]");
  }
}

}  // namespace hmdg
