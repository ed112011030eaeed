#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <span>
#include <vector>

namespace amrbddc::linalg {

struct Triplet {
  int row{0};
  int col{0};
  double value{0.0};
};

// Symmetric matrix stored as its lower triangle in CSR, columns ascending, diagonal last.
class SymSparse {
 public:
  SymSparse() = default;
  // Entries above the diagonal are mirrored; duplicates are summed in sorted order.
  [[nodiscard]] static SymSparse from_triplets(int n, std::vector<Triplet> t);
  [[nodiscard]] static SymSparse from_dense(const Eigen::MatrixXd& A, double drop = 0.0);

  [[nodiscard]] int rows() const { return n_; }
  [[nodiscard]] std::size_t nnz() const { return val_.size(); }
  [[nodiscard]] std::span<const int> row_ptr() const { return ptr_; }
  [[nodiscard]] std::span<const int> col_idx() const { return idx_; }
  [[nodiscard]] std::span<const double> values() const { return val_; }

  void multiply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
  [[nodiscard]] double diagonal(int i) const;
  [[nodiscard]] double entry(int i, int j) const;
  // Principal submatrix on sorted indices.
  [[nodiscard]] SymSparse principal(std::span<const int> idx) const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] Eigen::SparseMatrix<double> to_eigen_full() const;

 private:
  int n_{0};
  std::vector<int> ptr_{0};
  std::vector<int> idx_;
  std::vector<double> val_;
};

// General CSR block, used for off-diagonal couplings.
class Csr {
 public:
  int rows{0};
  int cols{0};
  std::vector<int> ptr{0};
  std::vector<int> idx;
  std::vector<double> val;

  // y = B x
  void multiply(std::span<const double> x, std::span<double> y) const;
  // y = B^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
};

// Block A(rows, cols) of a symmetric matrix; rows and cols sorted and disjoint.
[[nodiscard]] Csr extract_block(const SymSparse& A, std::span<const int> rows, std::span<const int> cols);

void write_coo(std::ostream& os, const SymSparse& A);
[[nodiscard]] SymSparse read_coo(std::istream& is);

}  // namespace amrbddc::linalg
