#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amrbddc/assembly.hpp"
#include "amrbddc/linalg/factor.hpp"

namespace amrbddc {

// Interface and interior split of subdomain DOFs.
struct InterfaceMap {
  std::vector<std::int64_t> gamma_dofs;  // sorted global dof ids shared by two or more subdomains
  std::vector<int> multiplicity;
  struct Local {
    std::vector<int> interface;    // local indices, ascending
    std::vector<int> interior;     // local indices, ascending
    std::vector<int> gamma_index;  // interface position -> index into gamma_dofs
  };
  std::vector<Local> sub;

  [[nodiscard]] int size() const { return static_cast<int>(gamma_dofs.size()); }
};

// Core: per-subdomain sorted lists of referenced free global dofs.
[[nodiscard]] InterfaceMap classify_interface(const std::vector<std::vector<std::int64_t>>& sub_dofs);
[[nodiscard]] InterfaceMap classify_interface(std::span<const SubdomainSystem> systems);
// Without assembly, from the element-to-dof map.
[[nodiscard]] InterfaceMap classify_interface(const DofMap& dm, const Partition& part, const GlobalDofs& dofs);

enum class WeightKind { Cardinality, Stiffness };

// Per subdomain, per interface position.
[[nodiscard]] std::vector<std::vector<double>> interface_weights(std::span<const SubdomainSystem> systems,
                                                                 const InterfaceMap& im, WeightKind kind);

// Matrix-free interface Schur complement S = sum_i R_i^T (A_GG - A_GI A_II^{-1} A_IG) R_i.
class SchurComplement {
 public:
  SchurComplement(std::span<const SubdomainSystem> systems, const InterfaceMap& im);

  [[nodiscard]] int size() const { return im_->size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] std::vector<double> reduced_rhs() const;
  // Interior recovery; the result covers all global dofs including Dirichlet values.
  [[nodiscard]] std::vector<double> recover(std::span<const double> u_gamma, const GlobalDofs& dofs) const;

  // Interior solve helpers for callers that need them.
  void solve_interior(int s, std::span<double> x) const;
  void apply_ig(int s, std::span<const double> x_gamma_local, std::span<double> y_interior) const;
  void apply_gi(int s, std::span<const double> x_interior, std::span<double> y_gamma_local) const;
  void apply_gg(int s, std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] int num_subdomains() const { return static_cast<int>(blocks_.size()); }

 private:
  struct Block {
    linalg::SymSparse aii, agg;
    linalg::Csr aig;
    linalg::SparseFactor fii;
  };
  std::span<const SubdomainSystem> systems_;
  const InterfaceMap* im_;
  std::vector<Block> blocks_;
};

}  // namespace amrbddc
