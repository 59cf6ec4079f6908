#include "hmdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "hmdg/errors.hpp"

namespace hmdg {

namespace {

// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  for (int j = 2; j <= n; ++j) {
    const double p_next = ((2.0 * j - 1.0) * x * p - (j - 1.0) * p_prev) / j;
    p_prev = p;
    p = p_next;
  }
  const double dp = n * (x * p - p_prev) / (x * x - 1.0);
  return {p, dp};
}

}  // namespace

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

namespace {

QuadratureRule make_collapsed_rule(int degree) {
  // xi = a, eta = (1 - a) b with a, b in [0, 1]; Jacobian (1 - a) raises the
  // degree in a by one.
  const int n = gauss_points_for_degree(degree + 1);
  Eigen::VectorXd s, w;
  gauss_legendre(n, s, w);
  QuadratureRule rule;
  rule.points.resize(2, n * n);
  rule.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    const double a = 0.5 * (1.0 + s[i]);
    for (int j = 0; j < n; ++j) {
      const double b = 0.5 * (1.0 + s[j]);
      rule.points(0, q) = a;
      rule.points(1, q) = (1.0 - a) * b;
      rule.weights[q] = 0.25 * w[i] * w[j] * (1.0 - a);
      ++q;
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& reference_triangle_rule(int degree) {
  if (degree < 0) throw InvalidArgument("reference_triangle_rule: negative degree");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[degree];
  if (!slot) slot = std::make_unique<QuadratureRule>(make_collapsed_rule(degree));
  return *slot;
}

}  // namespace hmdg
