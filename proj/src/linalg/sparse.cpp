#include "amrbddc/linalg/sparse.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "amrbddc/error.hpp"

namespace amrbddc::linalg {

SymSparse SymSparse::from_triplets(int n, std::vector<Triplet> t) {
  for (auto& e : t) {
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) throw DimensionMismatch("triplet out of range");
    if (e.row < e.col) std::swap(e.row, e.col);
  }
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SymSparse A;
  A.n_ = n;
  A.ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  A.idx_.reserve(t.size());
  A.val_.reserve(t.size());
  for (std::size_t k = 0; k < t.size();) {
    const int r = t[k].row, c = t[k].col;
    double v = 0.0;
    for (; k < t.size() && t[k].row == r && t[k].col == c; ++k) v += t[k].value;
    A.idx_.push_back(c);
    A.val_.push_back(v);
    A.ptr_[static_cast<std::size_t>(r) + 1]++;
  }
  for (int i = 0; i < n; ++i) A.ptr_[i + 1] += A.ptr_[i];
  return A;
}

SymSparse SymSparse::from_dense(const Eigen::MatrixXd& M, double drop) {
  std::vector<Triplet> t;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j <= i; ++j)
      if (std::abs(M(i, j)) > drop || i == j) t.push_back({i, j, M(i, j)});
  return from_triplets(static_cast<int>(M.rows()), std::move(t));
}

void SymSparse::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(n_) || y.size() != static_cast<std::size_t>(n_))
    throw DimensionMismatch("matrix-vector size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      const int j = idx_[p];
      s += val_[p] * x[j];
      if (j != i) y[j] += val_[p] * x[i];
    }
    y[i] += s;
  }
}

std::vector<double> SymSparse::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(n_));
  multiply(x, y);
  return y;
}

double SymSparse::entry(int i, int j) const {
  if (i < j) std::swap(i, j);
  const auto b = idx_.begin() + ptr_[i], e = idx_.begin() + ptr_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val_[static_cast<std::size_t>(it - idx_.begin())] : 0.0;
}

double SymSparse::diagonal(int i) const { return entry(i, i); }

SymSparse SymSparse::principal(std::span<const int> idx) const {
  std::vector<int> map(static_cast<std::size_t>(n_), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) map[static_cast<std::size_t>(idx[k])] = static_cast<int>(k);
  SymSparse B;
  B.n_ = static_cast<int>(idx.size());
  B.ptr_.assign(idx.size() + 1, 0);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int i = idx[k];
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      const int m = map[static_cast<std::size_t>(idx_[p])];
      if (m < 0) continue;
      B.idx_.push_back(m);
      B.val_.push_back(val_[p]);
    }
    B.ptr_[k + 1] = static_cast<int>(B.idx_.size());
  }
  return B;
}

Eigen::MatrixXd SymSparse::to_dense() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      M(i, idx_[p]) = val_[p];
      M(idx_[p], i) = val_[p];
    }
  return M;
}

Eigen::SparseMatrix<double> SymSparse::to_eigen_full() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * val_.size());
  for (int i = 0; i < n_; ++i)
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      t.emplace_back(i, idx_[p], val_[p]);
      if (idx_[p] != i) t.emplace_back(idx_[p], i, val_[p]);
    }
  Eigen::SparseMatrix<double> M(n_, n_);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

void Csr::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) s += val[p] * x[idx[p]];
    y[i] = s;
  }
}

void Csr::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) y[idx[p]] += val[p] * x[i];
}

Csr extract_block(const SymSparse& A, std::span<const int> rows, std::span<const int> cols) {
  const int n = A.rows();
  std::vector<int> rmap(static_cast<std::size_t>(n), -1), cmap(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) rmap[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);
  for (std::size_t k = 0; k < cols.size(); ++k) cmap[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
  std::vector<Triplet> t;
  const auto ptr = A.row_ptr();
  const auto idx = A.col_idx();
  const auto val = A.values();
  for (int i = 0; i < n; ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      const int j = idx[p];
      if (rmap[i] >= 0 && cmap[j] >= 0) t.push_back({rmap[i], cmap[j], val[p]});
      if (i != j && rmap[j] >= 0 && cmap[i] >= 0) t.push_back({rmap[j], cmap[i], val[p]});
    }
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  Csr B;
  B.rows = static_cast<int>(rows.size());
  B.cols = static_cast<int>(cols.size());
  B.ptr.assign(rows.size() + 1, 0);
  for (const auto& e : t) {
    B.idx.push_back(e.col);
    B.val.push_back(e.value);
    B.ptr[static_cast<std::size_t>(e.row) + 1]++;
  }
  for (int i = 0; i < B.rows; ++i) B.ptr[i + 1] += B.ptr[i];
  return B;
}

void write_coo(std::ostream& os, const SymSparse& A) {
  const auto prec = os.precision(17);
  os << A.rows() << ' ' << A.nnz() << '\n';
  const auto ptr = A.row_ptr();
  const auto idx = A.col_idx();
  const auto val = A.values();
  for (int i = 0; i < A.rows(); ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) os << i << ' ' << idx[p] << ' ' << val[p] << '\n';
  os.precision(prec);
}

SymSparse read_coo(std::istream& is) {
  int n = 0;
  std::size_t nnz = 0;
  if (!(is >> n >> nnz)) throw InvalidArgument("malformed coordinate file header");
  std::vector<Triplet> t(nnz);
  for (auto& e : t)
    if (!(is >> e.row >> e.col >> e.value)) throw InvalidArgument("truncated coordinate file");
  return SymSparse::from_triplets(n, std::move(t));
}

}  // namespace amrbddc::linalg
