#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "amrbddc/bddc.hpp"
#include "amrbddc/dofmap.hpp"
#include "amrbddc/forest.hpp"
#include "amrbddc/krylov.hpp"
#include "amrbddc/problems.hpp"

namespace amrbddc {

struct SolveContext;

struct SolverOptions {
  int num_subdomains{8};
  int levels{2};
  int level2_subdomains{0};  // 0: num_subdomains / 8, at least 2
  WeightKind weights{WeightKind::Cardinality};
  AdjacencyRule adjacency{AdjacencyRule::Face};
  std::optional<bool> corners;  // default: on for elasticity
  PcgOptions pcg{};
  // Called once after the preconditioner set-up.
  std::function<void(const SolveContext&)> inspect;
};

struct SolveContext {
  const Forest& forest;
  const DofMap& dofmap;
  const Partition& partition;
  const ComponentLabeling& components;
  std::span<const SubdomainSystem> systems;
  const InterfaceMap& interface;
  const Bddc& bddc;
};

struct Summary {
  double min{0.0}, max{0.0}, avg{0.0};
};
[[nodiscard]] Summary summarize(const std::vector<double>& v);

struct SolveReport {
  int num_subdomains{0};
  std::size_t num_elements{0};
  std::size_t n{0};       // all dofs, Dirichlet included
  std::size_t n_free{0};
  int n_gamma{0};
  int n_coarse{0};
  int levels{2};
  int iterations{0};
  bool converged{false};
  double t_setup{0.0};
  double t_pcg{0.0};
  Summary local_dofs, local_coarse, local_factor, local_basis;
  PcgResult pcg;
  std::vector<double> solution;  // per global dof
};

// Partition, subassemble, build BDDC, run PCG on the interface, recover interiors.
[[nodiscard]] SolveReport solve(const Forest& f, const DofMap& dm, const Problem& pb, const SolverOptions& opt);
[[nodiscard]] SolveReport solve(const Forest& f, int order, const Problem& pb, const SolverOptions& opt);

}  // namespace amrbddc
