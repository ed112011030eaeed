#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "amrbddc/dofmap.hpp"
#include "amrbddc/forest.hpp"
#include "amrbddc/problems.hpp"
#include "amrbddc/solver.hpp"

namespace amrbddc {

struct ErrorEstimate {
  std::vector<double> eta;  // per element H1-seminorm of u_h - u*
  double l2{0.0};           // global L2 error
  double h1{0.0};           // global H1-seminorm error
};

using ScalarField = std::function<double(const std::array<double, 3>&)>;
using GradientField = std::function<std::array<double, 3>(const std::array<double, 3>&)>;

// u holds values per global node (scalar problems).
[[nodiscard]] ErrorEstimate estimate_error(const Forest& f, const DofMap& dm, const ScalarField& exact,
                                           const GradientField& gradient, std::span<const double> u);
// Requires a problem with a known exact solution.
[[nodiscard]] ErrorEstimate estimate_error(const Forest& f, const DofMap& dm, const Problem& pb,
                                           std::span<const double> u);

// Elements with eta > theta * max(eta).
[[nodiscard]] std::vector<char> mark_threshold(std::span<const double> eta, double theta);

struct HistogramMarking {
  double theta_hat{0.0};
  double bin_width{0.0};
  std::vector<std::int64_t> counts;  // counts[m-1] holds eta in ((m-1)L, mL]; zeros go to the first bin
  std::vector<char> marked;
  std::size_t num_marked{0};
};

[[nodiscard]] HistogramMarking mark_fraction_histogram(std::span<const double> eta, double zeta, int bins);

struct AdaptOptions {
  int order{1};
  int steps{5};
  double zeta{0.15};
  int bins{100};
  SolverOptions solver{};
};

struct AdaptStep {
  int step{0};
  std::size_t n_elements{0};
  std::size_t n_dofs{0};
  int n_gamma{0};
  int n_coarse{0};
  int iterations{0};
  double setup_time{0.0};
  double pcg_time{0.0};
  double l2_error{0.0};
  double h1_error{0.0};
};

// Solve, estimate, mark, refine, balance; repeated steps times. Returns steps + 1 rows.
// The final forest is written to last when given.
[[nodiscard]] std::vector<AdaptStep> adapt_loop(const Problem& pb, Forest initial, const AdaptOptions& opt,
                                                Forest* last = nullptr);

void write_adapt_csv(std::ostream& os, const std::vector<AdaptStep>& rows);

}  // namespace amrbddc
