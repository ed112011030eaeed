#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "amrbddc/assembly.hpp"
#include "amrbddc/linalg/factor.hpp"
#include "amrbddc/substructuring.hpp"

namespace amrbddc {

enum class GlobKind { Vertex, Edge, Face };

// Interface DOFs sharing the same set of (subdomain, component) pairs and solution component.
struct Glob {
  GlobKind kind{GlobKind::Face};
  std::vector<std::pair<int, int>> key;
  int field{0};
  std::vector<int> gamma;  // indices into InterfaceMap::gamma_dofs
};

struct GlobOptions {
  // Promote up to three non-collinear shared nodes per neighboring component pair to vertices.
  bool corners{false};
};

[[nodiscard]] std::vector<Glob> classify_globs(std::span<const SubdomainSystem> systems, const InterfaceMap& im,
                                               GlobOptions opt = {});

struct CoarseRow {
  int coarse{0};
  std::vector<std::pair<int, double>> entries;  // local dof, weight
};

struct BddcOptions {
  WeightKind weights{WeightKind::Cardinality};
  bool corners{false};
  int kernel_dim{1};
  int levels{2};
  int level2_subdomains{1};
  linalg::FactorOptions factor{};
};

// Balancing domain decomposition by constraints on the interface problem.
class Bddc {
 public:
  Bddc(std::span<const SubdomainSystem> systems, const InterfaceMap& im, BddcOptions opt);
  ~Bddc();
  Bddc(const Bddc&) = delete;
  Bddc& operator=(const Bddc&) = delete;

  void apply(std::span<const double> r, std::span<double> z) const;

  [[nodiscard]] int coarse_size() const { return static_cast<int>(globs_.size()); }
  [[nodiscard]] const std::vector<Glob>& globs() const { return globs_; }
  [[nodiscard]] const std::vector<CoarseRow>& constraints(int s) const { return local_[static_cast<std::size_t>(s)].rows; }
  [[nodiscard]] const Eigen::MatrixXd& phi(int s) const { return local_[static_cast<std::size_t>(s)].phi; }
  [[nodiscard]] const Eigen::MatrixXd& coarse_matrix(int s) const { return local_[static_cast<std::size_t>(s)].sc; }
  [[nodiscard]] linalg::Inertia saddle_inertia(int s) const { return local_[static_cast<std::size_t>(s)].saddle.inertia(); }
  [[nodiscard]] const std::vector<double>& weights(int s) const { return weights_[static_cast<std::size_t>(s)]; }
  // Local coarse counts: all rows, and rows from edges and faces only.
  [[nodiscard]] std::vector<int> local_coarse_counts(bool faces_and_edges_only = false) const;
  [[nodiscard]] int levels() const { return level2_ ? 3 : 2; }
  [[nodiscard]] double factor_seconds() const { return t_factor_; }
  [[nodiscard]] double basis_seconds() const { return t_basis_; }
  [[nodiscard]] double local_factor_seconds(int s) const { return local_[static_cast<std::size_t>(s)].t_factor; }
  [[nodiscard]] double local_basis_seconds(int s) const { return local_[static_cast<std::size_t>(s)].t_basis; }
  // Solution of the local constrained problem [A C^T; C 0] [u; mu] = [rhs; 0].
  void local_solve(int s, std::span<double> u) const;

  void write_diagnostics(std::ostream& os, int s) const;
  // CSV: subdomain, n_dofs, n_components, n_coarse, factor_time, solve_time.
  void write_local_properties(std::ostream& os) const;

 private:
  struct Local {
    std::vector<CoarseRow> rows;
    linalg::SparseFactor saddle;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd sc;
    double t_factor{0.0};
    double t_basis{0.0};
  };
  struct Multilevel;

  void coarse_solve(std::span<const double> r, std::span<double> u) const;

  std::span<const SubdomainSystem> systems_;
  const InterfaceMap* im_;
  BddcOptions opt_;
  std::vector<Glob> globs_;
  std::vector<std::vector<double>> weights_;
  std::vector<Local> local_;
  linalg::SparseFactor coarse_;
  std::unique_ptr<Multilevel> level2_;
  double t_factor_{0.0};
  double t_basis_{0.0};
};

}  // namespace amrbddc
