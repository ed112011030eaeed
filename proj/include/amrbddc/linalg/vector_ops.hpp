#pragma once

#include <cmath>
#include <span>

namespace amrbddc::linalg {

// Fixed left-to-right summation order.
[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

[[nodiscard]] inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y += alpha x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace amrbddc::linalg
