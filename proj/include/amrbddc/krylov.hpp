#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace amrbddc {

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct PcgOptions {
  double tol{1e-6};  // on ||r_k|| / ||r_0||
  int max_iterations{500};
};

struct PcgResult {
  std::vector<double> x;
  int iterations{0};
  bool converged{false};
  std::vector<double> history;  // relative residual per iteration, history[0] = 1
};

// Preconditioned conjugate gradients from a zero initial guess.
[[nodiscard]] PcgResult pcg(const LinearOperator& op, const LinearOperator& precond, std::span<const double> g,
                            PcgOptions opt = {});

void write_residual_csv(std::ostream& os, const PcgResult& r);

}  // namespace amrbddc
