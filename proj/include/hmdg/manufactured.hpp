#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "hmdg/coefficients.hpp"

namespace hmdg {

using SpaceTimeVector = std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)>;

/// Closed-form pressure and concentration with every derived quantity. The
/// embedded ProblemSpec carries q = div u, c*_inj = c, the extra transport
/// source f and c_0 = c(., 0).
struct ManufacturedCase {
  std::string name;
  SpaceTimeFunction p;
  SpaceTimeFunction c;
  SpaceTimeVector grad_p;
  SpaceTimeVector grad_c;
  SpaceTimeVector u;
  SpaceTimeVector sigma;
  SpaceTimeFunction source;
  SpaceTimeFunction transport_source;
  ProblemSpec spec;
};

struct CosineCaseParameters {
  double mobility_ratio = 2.0;
  double mu0 = 1.0;
  double permeability = 1.0;
  double porosity = 1.0;
  double d_m = 1e-2;
  double d_l = 1.0;
  double d_t = 0.1;
  double final_time = 0.1;
  double dt = 0.01;
};

/// On the unit square with psi = cos(pi x) cos(pi y):
///   p = psi (1 + t/2),  c = 1/2 + psi e^{-t} / 4,
/// quarter-power viscosity, u = -(k*/mu(c)) grad p. Both u . n and
/// (D(u) grad c) . n vanish on the boundary.
ManufacturedCase cosine_case(const CosineCaseParameters& params = {});

/// Constant velocity u = (ux, uy) driven by a linear pressure with mu = k* = 1,
/// c = c0 + g . x + rate t. Every exact field lies in the k = 1 spaces
/// (k = 0 as well when g = 0 and u = 0); u . n does not vanish on the boundary
/// unless u = 0.
ManufacturedCase linear_case(const Eigen::Vector2d& velocity, double c0, const Eigen::Vector2d& gradient,
                             double rate, double dt = 0.01, double final_time = 0.1);

}  // namespace hmdg
