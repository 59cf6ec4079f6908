#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "hmdg/errors.hpp"

namespace hmdg {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// E(u) = u u^T / |u|^2, the orthogonal projection onto span{u}; E(0) = 0.
template <typename Derived>
Matrix2<typename Derived::Scalar> projection_along(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm2 = u.squaredNorm();
  if (norm2 == Scalar(0)) return Matrix2<Scalar>::Zero();
  return (u * u.transpose()) / norm2;
}

/// D(u) = phi [d_m I + |u| (d_l E(u) + d_t E_perp(u))] together with its
/// inverse, assembled from the spectral decomposition E / E_perp.
template <typename Scalar>
struct DispersionTensor {
  Matrix2<Scalar> matrix;
  Matrix2<Scalar> inverse;
  /// Eigenvalue along u: phi (d_m + d_l |u|).
  Scalar longitudinal;
  /// Eigenvalue across u: phi (d_m + d_t |u|).
  Scalar transverse;
};

template <typename Derived>
DispersionTensor<typename Derived::Scalar> dispersion(const Eigen::MatrixBase<Derived>& u,
                                                      typename Derived::Scalar porosity,
                                                      typename Derived::Scalar d_m, typename Derived::Scalar d_l,
                                                      typename Derived::Scalar d_t) {
  using Scalar = typename Derived::Scalar;
  if (!(d_m > Scalar(0))) throw InvalidArgument("dispersion: molecular diffusion d_m must be positive");
  if (!(porosity > Scalar(0))) throw InvalidArgument("dispersion: porosity must be positive");
  const Matrix2<Scalar> E = projection_along(u);
  const Matrix2<Scalar> E_perp = Matrix2<Scalar>::Identity() - E;
  const Scalar speed = u.norm();
  DispersionTensor<Scalar> D;
  D.longitudinal = porosity * (d_m + d_l * speed);
  D.transverse = porosity * (d_m + d_t * speed);
  D.matrix = D.longitudinal * E + D.transverse * E_perp;
  D.inverse = E / D.longitudinal + E_perp / D.transverse;
  return D;
}

using ScalarFunction = std::function<double(const Eigen::Vector2d&)>;
using SpaceTimeFunction = std::function<double(const Eigen::Vector2d&, double)>;

/// Viscosity law mu(c). Quarter-power mixing:
///   mu(c) = mu0 [1 + (M^{1/4} - 1) c]^{-4},  M = mu(0) / mu(1).
struct ViscosityModel {
  enum class Kind { Constant, QuarterPowerMixing };
  Kind kind = Kind::Constant;
  double mu0 = 1.0;
  double mobility_ratio = 1.0;

  double operator()(double c) const {
    if (kind == Kind::Constant) return mu0;
    const double base = 1.0 + (std::pow(mobility_ratio, 0.25) - 1.0) * c;
    return mu0 / (base * base * base * base);
  }
  /// d mu / d c.
  double derivative(double c) const {
    if (kind == Kind::Constant) return 0.0;
    const double beta = std::pow(mobility_ratio, 0.25) - 1.0;
    const double base = 1.0 + beta * c;
    return -4.0 * beta * mu0 / (base * base * base * base * base);
  }
};

/// Coefficients and data of the miscible displacement system.
struct ProblemSpec {
  ScalarFunction porosity = [](const Eigen::Vector2d&) { return 1.0; };
  ScalarFunction permeability = [](const Eigen::Vector2d&) { return 1.0; };
  ViscosityModel viscosity;
  /// q(x, t); positive at injection, negative at production.
  SpaceTimeFunction source = [](const Eigen::Vector2d&, double) { return 0.0; };
  /// c*(x, t) used where q > 0.
  SpaceTimeFunction injected_concentration = [](const Eigen::Vector2d&, double) { return 0.0; };
  /// Extra right-hand side of the concentration balance. Empty outside
  /// manufactured-solution runs.
  SpaceTimeFunction transport_source;
  ScalarFunction initial_concentration = [](const Eigen::Vector2d&) { return 0.0; };
  double d_m = 1e-2;
  double d_l = 0.0;
  double d_t = 0.0;
  double final_time = 1.0;
  double dt = 0.1;
};

/// a(c) = mu(clamp(c, 0, 1)) / k*(x).
inline double mobility(double c, const ProblemSpec& spec, const Eigen::Vector2d& x) {
  return spec.viscosity(std::clamp(c, 0.0, 1.0)) / spec.permeability(x);
}

/// Number of time steps M = T / dt; throws ConfigError unless T / dt is an
/// integer within 1e-12 relative.
int time_step_count(const ProblemSpec& spec);

/// Checks phi > 0, d_m > 0, d_l, d_t >= 0, k* > 0 and a(c) > 0 for c in [0, 1]
/// on sample points; throws ConfigError naming the violated bound.
void validate_problem(const ProblemSpec& spec, const Eigen::Matrix2Xd& sample_points);

}  // namespace hmdg
