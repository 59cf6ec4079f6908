#include "hmdg/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace hmdg {

namespace {

struct CosineState {
  Eigen::Vector2d grad_c;
  Eigen::Vector2d grad_p;
  Eigen::Vector2d u;
  Eigen::Matrix2d jac_u;  // (i, j) = d u_i / d x_j
  Eigen::Matrix2d hess_c;
  double c = 0.0;
  double c_t = 0.0;
};

CosineState cosine_state(const CosineCaseParameters& prm, const Eigen::Vector2d& x, double t) {
  constexpr double pi = std::numbers::pi;
  const double cx = std::cos(pi * x.x()), sx = std::sin(pi * x.x());
  const double cy = std::cos(pi * x.y()), sy = std::sin(pi * x.y());
  const double psi = cx * cy;
  const Eigen::Vector2d grad_psi(-pi * sx * cy, -pi * cx * sy);
  Eigen::Matrix2d hess_psi;
  hess_psi << -pi * pi * psi, pi * pi * sx * sy, pi * pi * sx * sy, -pi * pi * psi;

  const double decay = std::exp(-t);
  const double growth = 1.0 + t / 2.0;
  const double beta = std::pow(prm.mobility_ratio, 0.25) - 1.0;
  const double m0 = prm.permeability / prm.mu0;

  CosineState s;
  s.c = 0.5 + 0.25 * psi * decay;
  s.c_t = -0.25 * psi * decay;
  s.grad_c = 0.25 * decay * grad_psi;
  s.hess_c = 0.25 * decay * hess_psi;
  s.grad_p = growth * grad_psi;
  const double base = 1.0 + beta * s.c;
  const double m = m0 * base * base * base * base;
  const double dm = 4.0 * beta * m0 * base * base * base;
  s.u = -m * s.grad_p;
  s.jac_u = -dm * s.grad_p * s.grad_c.transpose() - m * growth * hess_psi;
  return s;
}

/// div(D(u) grad c) from the closed-form derivatives (phi constant).
double dispersion_divergence(const CosineCaseParameters& prm, const CosineState& s) {
  const Eigen::Vector2d& g = s.grad_c;
  const double laplace_c = s.hess_c.trace();
  const double speed = s.u.norm();
  if (speed < 1e-300) return prm.porosity * prm.d_m * laplace_c;
  const Eigen::Vector2d w = s.u / speed;
  const Eigen::Vector2d grad_speed = s.jac_u.transpose() * w;
  const double div_u = s.jac_u.trace();
  const double ug = s.u.dot(g);
  const Eigen::Vector2d grad_ug = s.jac_u.transpose() * g + s.hess_c * s.u;
  const double div_w = div_u / speed - s.u.dot(grad_speed) / (speed * speed);
  const double isotropic = prm.d_t * grad_speed.dot(g) + (prm.d_m + prm.d_t * speed) * laplace_c;
  const double directional = grad_ug.dot(s.u) / speed + ug * div_w;
  return prm.porosity * (isotropic + (prm.d_l - prm.d_t) * directional);
}

}  // namespace

ManufacturedCase cosine_case(const CosineCaseParameters& prm) {
  ManufacturedCase mc;
  mc.name = "cosine";
  mc.p = [](const Eigen::Vector2d& x, double t) {
    return std::cos(std::numbers::pi * x.x()) * std::cos(std::numbers::pi * x.y()) * (1.0 + t / 2.0);
  };
  mc.c = [prm](const Eigen::Vector2d& x, double t) { return cosine_state(prm, x, t).c; };
  mc.grad_p = [prm](const Eigen::Vector2d& x, double t) { return cosine_state(prm, x, t).grad_p; };
  mc.grad_c = [prm](const Eigen::Vector2d& x, double t) { return cosine_state(prm, x, t).grad_c; };
  mc.u = [prm](const Eigen::Vector2d& x, double t) { return cosine_state(prm, x, t).u; };
  mc.sigma = [prm](const Eigen::Vector2d& x, double t) {
    const CosineState s = cosine_state(prm, x, t);
    const DispersionTensor<double> D = dispersion(s.u, prm.porosity, prm.d_m, prm.d_l, prm.d_t);
    return Eigen::Vector2d(-(D.matrix * s.grad_c));
  };
  mc.source = [prm](const Eigen::Vector2d& x, double t) { return cosine_state(prm, x, t).jac_u.trace(); };
  mc.transport_source = [prm](const Eigen::Vector2d& x, double t) {
    const CosineState s = cosine_state(prm, x, t);
    return prm.porosity * s.c_t + s.u.dot(s.grad_c) - dispersion_divergence(prm, s);
  };

  ProblemSpec& spec = mc.spec;
  const double phi = prm.porosity;
  const double kperm = prm.permeability;
  spec.porosity = [phi](const Eigen::Vector2d&) { return phi; };
  spec.permeability = [kperm](const Eigen::Vector2d&) { return kperm; };
  spec.viscosity = {ViscosityModel::Kind::QuarterPowerMixing, prm.mu0, prm.mobility_ratio};
  spec.source = mc.source;
  spec.injected_concentration = mc.c;
  spec.transport_source = mc.transport_source;
  const SpaceTimeFunction c = mc.c;
  spec.initial_concentration = [c](const Eigen::Vector2d& x) { return c(x, 0.0); };
  spec.d_m = prm.d_m;
  spec.d_l = prm.d_l;
  spec.d_t = prm.d_t;
  spec.final_time = prm.final_time;
  spec.dt = prm.dt;
  return mc;
}

ManufacturedCase linear_case(const Eigen::Vector2d& velocity, double c0, const Eigen::Vector2d& gradient,
                             double rate, double dt, double final_time) {
  ManufacturedCase mc;
  mc.name = "linear";
  ProblemSpec& spec = mc.spec;
  spec.d_l = 1.0;
  spec.d_t = 0.1;
  const Eigen::Vector2d u = velocity;
  const Eigen::Vector2d g = gradient;
  const DispersionTensor<double> D = dispersion(u, 1.0, spec.d_m, spec.d_l, spec.d_t);
  const Eigen::Vector2d sigma = -(D.matrix * g);

  mc.p = [u](const Eigen::Vector2d& x, double) { return -u.dot(x - Eigen::Vector2d(0.5, 0.5)); };
  mc.c = [c0, g, rate](const Eigen::Vector2d& x, double t) { return c0 + g.dot(x) + rate * t; };
  mc.grad_p = [u](const Eigen::Vector2d&, double) { return Eigen::Vector2d(-u); };
  mc.grad_c = [g](const Eigen::Vector2d&, double) { return g; };
  mc.u = [u](const Eigen::Vector2d&, double) { return u; };
  mc.sigma = [sigma](const Eigen::Vector2d&, double) { return sigma; };
  mc.source = [](const Eigen::Vector2d&, double) { return 0.0; };
  const double f = rate + u.dot(g);
  mc.transport_source = [f](const Eigen::Vector2d&, double) { return f; };

  spec.source = mc.source;
  spec.injected_concentration = mc.c;
  spec.transport_source = mc.transport_source;
  const SpaceTimeFunction c = mc.c;
  spec.initial_concentration = [c](const Eigen::Vector2d& x) { return c(x, 0.0); };
  spec.final_time = final_time;
  spec.dt = dt;
  return mc;
}

}  // namespace hmdg
