#pragma once

#include <array>
#include <string>

namespace amrbddc {

enum class ProblemKind { PoissonConst, PoissonArctan, Elasticity };

// Model problems on the unit square/cube with Dirichlet data on the whole boundary.
struct Problem {
  ProblemKind kind{ProblemKind::PoissonConst};
  int dim{3};
  // arctan layer: u = atan(s (|x - c| - r0))
  double sharpness{60.0};
  double radius{1.0471975511965976};
  std::array<double, 3> center{1.25, -0.25, -0.25};
  // linear elasticity
  double young{1e10};
  double poisson{1.0 / 3.0};
  std::array<double, 3> force{0.0, 0.0, -1e5};

  [[nodiscard]] static Problem poisson_const(int dim);
  [[nodiscard]] static Problem arctan(int dim);
  [[nodiscard]] static Problem elasticity(int dim, double young = 1e10, double poisson = 1.0 / 3.0);

  [[nodiscard]] int components() const { return kind == ProblemKind::Elasticity ? dim : 1; }
  [[nodiscard]] bool has_exact() const { return kind == ProblemKind::PoissonArctan; }
  [[nodiscard]] double exact(const std::array<double, 3>& x) const;
  [[nodiscard]] std::array<double, 3> exact_gradient(const std::array<double, 3>& x) const;
  // Right-hand side f for scalar problems.
  [[nodiscard]] double source(const std::array<double, 3>& x) const;
  [[nodiscard]] double dirichlet(const std::array<double, 3>& x, int component) const;
  [[nodiscard]] bool variable_source() const { return kind == ProblemKind::PoissonArctan; }
  // Lame parameters; refuses the incompressible limit.
  [[nodiscard]] double lame_lambda() const;
  [[nodiscard]] double lame_mu() const;
  // Dimension of the kernel of a floating subdomain operator.
  [[nodiscard]] int kernel_dim() const;
  [[nodiscard]] std::string name() const;
};

}  // namespace amrbddc
