#include "amrbddc/basis.hpp"

#include <cmath>
#include <numbers>

#include "amrbddc/error.hpp"

namespace amrbddc::basis {

namespace {
// Legendre P_n and its derivative at x in [-1,1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}
}  // namespace

std::vector<double> lobatto_points(int p) {
  if (p < 1) throw InvalidArgument("polynomial order must be at least 1");
  std::vector<double> x(static_cast<std::size_t>(p) + 1);
  x.front() = -1.0;
  x.back() = 1.0;
  // interior points: roots of P_p', Newton on the Chebyshev-Lobatto guess
  for (int j = 1; j < p; ++j) {
    double t = -std::cos(std::numbers::pi * j / p);
    for (int it = 0; it < 100; ++it) {
      // q = P_p', q' = P_p'' from the Legendre ODE
      double pp = 0.0, dpp = 0.0;
      legendre(p, t, pp, dpp);
      const double ddp = (2.0 * t * dpp - p * (p + 1.0) * pp) / (1.0 - t * t);
      const double step = dpp / ddp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(j)] = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t m = x.size() - 1 - i;
    const double sym = 0.5 * (x[i] - x[m]);
    out[i] = 0.5 * (1.0 + sym);
  }
  out.front() = 0.0;
  out.back() = 1.0;
  if (p % 2 == 0) out[static_cast<std::size_t>(p / 2)] = 0.5;
  return out;
}

std::vector<double> lagrange_values(std::span<const double> nodes, double x) {
  std::vector<double> v(nodes.size(), 1.0);
  for (std::size_t m = 0; m < nodes.size(); ++m)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (j != m) v[m] *= (x - nodes[j]) / (nodes[m] - nodes[j]);
  return v;
}

std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x) {
  const std::size_t n = nodes.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == m) continue;
      double term = 1.0 / (nodes[m] - nodes[k]);
      for (std::size_t j = 0; j < n; ++j)
        if (j != m && j != k) term *= (x - nodes[j]) / (nodes[m] - nodes[j]);
      d[m] += term;
    }
  }
  return d;
}

Quadrature1D gauss(int n) {
  if (n < 1) throw InvalidArgument("quadrature needs at least one point");
  Quadrature1D q;
  q.points.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, t, p, dp);
      const double step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    legendre(n, t, p, dp);
    // descending cosines give ascending points after the flip
    const std::size_t k = static_cast<std::size_t>(i);
    q.points[k] = 0.5 * (1.0 - t);
    q.weights[k] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return q;
}

}  // namespace amrbddc::basis
