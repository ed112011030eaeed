#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "amrbddc/linalg/sparse.hpp"

namespace amrbddc::linalg {

struct Inertia {
  int positive{0};
  int negative{0};
  int zero{0};
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

// Dense symmetric indefinite LDL^T with Bunch-Kaufman pivoting.
class BunchKaufman {
 public:
  BunchKaufman() = default;
  // Throws SingularMatrixError when a pivot falls below tol * max|A|.
  explicit BunchKaufman(const Eigen::MatrixXd& A, double tol = 1e-11);

  void solve(Eigen::Ref<Eigen::VectorXd> x) const;
  [[nodiscard]] Inertia inertia() const { return inertia_; }
  [[nodiscard]] int size() const { return static_cast<int>(perm_.size()); }

 private:
  Eigen::MatrixXd L_;
  std::vector<int> perm_;       // position k holds original row perm_[k]
  std::vector<int> block_;      // 1 or 2 at the first index of each block, 0 for the second
  Eigen::VectorXd d_diag_;
  Eigen::VectorXd d_off_;       // subdiagonal of 2x2 blocks
  Inertia inertia_;
};

enum class FactorKind { Cholesky, LDLT };

struct FactorOptions {
  // Pivots below this (after symmetric scaling) are delayed to the dense trailing block.
  double delay_tol{1e-9};
  double singular_tol{1e-11};
};

// Sparse symmetric factorization with fill-reducing ordering. The LDLT kind moves
// forced-trailing indices and tiny pivots into a dense trailing block factored by
// Bunch-Kaufman; the Cholesky kind refuses non-positive pivots.
class SparseFactor {
 public:
  SparseFactor() = default;
  SparseFactor(const SymSparse& A, FactorKind kind, std::span<const int> trailing = {},
               FactorOptions opt = {});

  void solve(std::span<double> x) const;
  void solve(Eigen::MatrixXd& B) const;
  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] Inertia inertia() const { return inertia_; }
  [[nodiscard]] std::size_t factor_nnz() const { return lnz_total_; }
  [[nodiscard]] int num_delayed() const { return static_cast<int>(delayed_.size()); }
  [[nodiscard]] std::span<const int> trailing_indices() const { return tail_; }

 private:
  void forward(std::span<double> x) const;
  void backward(std::span<double> x) const;

  int n_{0};
  FactorKind kind_{FactorKind::Cholesky};
  std::vector<double> scale_;
  std::vector<int> order_;      // sparse part, new position -> original index
  std::vector<int> lp_, lnz_, li_;
  std::vector<double> lx_, d_;
  std::vector<char> dead_;      // delayed positions in the sparse ordering
  std::vector<int> delayed_;    // positions
  std::vector<int> tail_;       // original indices of the dense block
  // Y = L^{-1} A_ST as compressed columns over sparse positions
  std::vector<int> yp_, yi_;
  std::vector<double> yx_;
  BunchKaufman dense_;
  Inertia inertia_;
  std::size_t lnz_total_{0};
};

}  // namespace amrbddc::linalg
