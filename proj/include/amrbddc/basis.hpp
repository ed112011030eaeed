#pragma once

#include <span>
#include <vector>

namespace amrbddc::basis {

// Gauss-Lobatto-Legendre points of order p on [0,1], symmetric, endpoints and midpoint exact.
[[nodiscard]] std::vector<double> lobatto_points(int p);

[[nodiscard]] std::vector<double> lagrange_values(std::span<const double> nodes, double x);
[[nodiscard]] std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x);

struct Quadrature1D {
  std::vector<double> points;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [0,1].
[[nodiscard]] Quadrature1D gauss(int n);

}  // namespace amrbddc::basis
