#include "amrbddc/linalg/factor.hpp"

#include <Eigen/OrderingMethods>
#include <algorithm>
#include <cmath>

#include "amrbddc/error.hpp"

namespace amrbddc::linalg {

BunchKaufman::BunchKaufman(const Eigen::MatrixXd& Ain, double tol) {
  const int n = static_cast<int>(Ain.rows());
  Eigen::MatrixXd A = Ain;
  L_ = Eigen::MatrixXd::Identity(n, n);
  perm_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm_[i] = i;
  block_.assign(static_cast<std::size_t>(n), 0);
  d_diag_ = Eigen::VectorXd::Zero(n);
  d_off_ = Eigen::VectorXd::Zero(n);
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  const double thr = tol * std::max(A.cwiseAbs().maxCoeff(), 1e-300);

  auto swap_sym = [&](int r, int s, int k) {
    if (r == s) return;
    A.row(r).swap(A.row(s));
    A.col(r).swap(A.col(s));
    std::swap(perm_[r], perm_[s]);
    for (int j = 0; j < k; ++j) std::swap(L_(r, j), L_(s, j));
  };

  int k = 0;
  while (k < n) {
    const double absakk = std::abs(A(k, k));
    int imax = k;
    double colmax = 0.0;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > colmax) {
        colmax = std::abs(A(i, k));
        imax = i;
      }
    if (std::max(absakk, colmax) <= thr) throw SingularMatrixError(perm_[k]);
    int kp = k, s = 1;
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      for (int j = k; j < n; ++j)
        if (j != imax) rowmax = std::max(rowmax, std::abs(A(imax, j)));
      if (absakk * rowmax >= alpha * colmax * colmax) {
        kp = k;
      } else if (std::abs(A(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        s = 2;
      }
    }
    const int kk = k + s - 1;
    swap_sym(kk, kp, k);
    if (s == 1) {
      const double d = A(k, k);
      if (std::abs(d) <= thr) throw SingularMatrixError(perm_[k]);
      for (int i = k + 1; i < n; ++i) L_(i, k) = A(i, k) / d;
      for (int j = k + 1; j < n; ++j)
        for (int i = k + 1; i < n; ++i) A(i, j) -= L_(i, k) * A(j, k);
      d_diag_(k) = d;
      block_[k] = 1;
      (d > 0 ? inertia_.positive : inertia_.negative)++;
    } else {
      const double a = A(k, k), b = A(k + 1, k), c = A(k + 1, k + 1);
      const double det = a * c - b * b;
      if (std::abs(det) <= thr * thr) throw SingularMatrixError(perm_[k]);
      for (int i = k + 2; i < n; ++i) {
        const double w1 = A(i, k), w2 = A(i, k + 1);
        L_(i, k) = (w1 * c - w2 * b) / det;
        L_(i, k + 1) = (w2 * a - w1 * b) / det;
      }
      for (int j = k + 2; j < n; ++j)
        for (int i = k + 2; i < n; ++i) A(i, j) -= L_(i, k) * A(j, k) + L_(i, k + 1) * A(j, k + 1);
      d_diag_(k) = a;
      d_diag_(k + 1) = c;
      d_off_(k) = b;
      block_[k] = 2;
      if (det < 0) {
        inertia_.positive++;
        inertia_.negative++;
      } else if (a + c > 0) {
        inertia_.positive += 2;
      } else {
        inertia_.negative += 2;
      }
    }
    k += s;
  }
}

void BunchKaufman::solve(Eigen::Ref<Eigen::VectorXd> x) const {
  const int n = size();
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) y(k) = x(perm_[k]);
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) y(i) -= L_(i, k) * y(k);
  for (int k = 0; k < n;) {
    if (block_[k] == 2) {
      const double a = d_diag_(k), b = d_off_(k), c = d_diag_(k + 1);
      const double det = a * c - b * b;
      const double y1 = y(k), y2 = y(k + 1);
      y(k) = (c * y1 - b * y2) / det;
      y(k + 1) = (a * y2 - b * y1) / det;
      k += 2;
    } else {
      y(k) /= d_diag_(k);
      ++k;
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    double s = y(k);
    for (int i = k + 1; i < n; ++i) s -= L_(i, k) * y(i);
    y(k) = s;
  }
  for (int k = 0; k < n; ++k) x(perm_[k]) = y(k);
}

SparseFactor::SparseFactor(const SymSparse& A, FactorKind kind, std::span<const int> trailing,
                           FactorOptions opt)
    : n_(A.rows()), kind_(kind) {
  if (kind == FactorKind::Cholesky && !trailing.empty())
    throw InvalidArgument("trailing indices require the indefinite factorization");
  const auto ptr = A.row_ptr();
  const auto idx = A.col_idx();
  const auto val = A.values();
  const std::size_t n = static_cast<std::size_t>(n_);

  // symmetric row-max scaling
  std::vector<double> rmax(n, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      const double a = std::abs(val[p]);
      rmax[i] = std::max(rmax[i], a);
      rmax[idx[p]] = std::max(rmax[idx[p]], a);
    }
  scale_.resize(n);
  for (std::size_t i = 0; i < n; ++i) scale_[i] = rmax[i] > 0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;

  std::vector<char> is_tail(n, 0);
  for (int t : trailing) {
    if (t < 0 || t >= n_) throw DimensionMismatch("trailing index out of range");
    is_tail[static_cast<std::size_t>(t)] = 1;
  }
  std::vector<int> sidx;
  for (int i = 0; i < n_; ++i)
    if (!is_tail[i]) sidx.push_back(i);
  const int ns = static_cast<int>(sidx.size());
  std::vector<int> sloc(n, -1);
  for (int k = 0; k < ns; ++k) sloc[static_cast<std::size_t>(sidx[k])] = k;

  // fill-reducing ordering of the sparse part
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * val.size());
    for (int i = 0; i < n_; ++i)
      for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
        const int a = sloc[i], b = sloc[idx[p]];
        if (a < 0 || b < 0) continue;
        t.emplace_back(a, b, 1.0);
        if (a != b) t.emplace_back(b, a, 1.0);
      }
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> M(ns, ns);
    M.setFromTriplets(t.begin(), t.end());
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P;
    Eigen::AMDOrdering<int> amd;
    amd(M, P);
    order_.resize(static_cast<std::size_t>(ns));
    for (int k = 0; k < ns; ++k) order_[k] = sidx[static_cast<std::size_t>(P.indices()[k])];
  }
  std::vector<int> pinv(n, -1);
  for (int k = 0; k < ns; ++k) pinv[static_cast<std::size_t>(order_[k])] = k;

  // strictly lower rows and diagonal in the new ordering, scaled
  std::vector<int> rp(static_cast<std::size_t>(ns) + 1, 0);
  std::vector<double> diag(static_cast<std::size_t>(ns), 0.0);
  for (int i = 0; i < n_; ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      const int a = pinv[i], b = pinv[idx[p]];
      if (a < 0 || b < 0 || a == b) continue;
      rp[static_cast<std::size_t>(std::max(a, b)) + 1]++;
    }
  for (int k = 0; k < ns; ++k) rp[k + 1] += rp[k];
  std::vector<int> rc(static_cast<std::size_t>(rp[ns]));
  std::vector<double> rv(static_cast<std::size_t>(rp[ns]));
  {
    std::vector<int> fill(rp.begin(), rp.end() - 1);
    for (int i = 0; i < n_; ++i)
      for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
        const int a = pinv[i], b = pinv[idx[p]];
        if (a < 0 || b < 0) continue;
        const double v = val[p] * scale_[i] * scale_[idx[p]];
        if (a == b) {
          diag[a] += v;
          continue;
        }
        const int r = std::max(a, b);
        rc[fill[r]] = std::min(a, b);
        rv[fill[r]++] = v;
      }
  }

  // symbolic
  std::vector<int> parent(static_cast<std::size_t>(ns), -1), flag(static_cast<std::size_t>(ns), -1);
  lnz_.assign(static_cast<std::size_t>(ns), 0);
  for (int k = 0; k < ns; ++k) {
    flag[k] = k;
    for (int p = rp[k]; p < rp[k + 1]; ++p)
      for (int i = rc[p]; flag[i] != k; i = parent[i]) {
        if (parent[i] == -1) parent[i] = k;
        lnz_[i]++;
        flag[i] = k;
      }
  }
  lp_.assign(static_cast<std::size_t>(ns) + 1, 0);
  for (int k = 0; k < ns; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
  li_.resize(static_cast<std::size_t>(lp_[ns]));
  lx_.resize(static_cast<std::size_t>(lp_[ns]));
  d_.assign(static_cast<std::size_t>(ns), 0.0);
  dead_.assign(static_cast<std::size_t>(ns), 0);

  // numeric, up-looking
  std::vector<double> y(static_cast<std::size_t>(ns), 0.0);
  std::vector<int> pattern(static_cast<std::size_t>(ns));
  std::vector<int> touched;
  std::fill(flag.begin(), flag.end(), -1);
  std::fill(lnz_.begin(), lnz_.end(), 0);
  for (int k = 0; k < ns; ++k) {
    y[k] = 0.0;
    int top = ns;
    flag[k] = k;
    for (int p = rp[k]; p < rp[k + 1]; ++p) {
      int i = rc[p];
      if (dead_[i]) continue;
      y[i] += rv[p];
      int len = 0;
      for (; flag[i] != k; i = parent[i]) {
        pattern[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double dk = diag[k];
    touched.clear();
    for (; top < ns; ++top) {
      const int i = pattern[top];
      const double yi = y[i];
      y[i] = 0.0;
      if (dead_[i]) continue;
      const int p2 = lp_[i] + lnz_[i];
      for (int p = lp_[i]; p < p2; ++p) y[li_[p]] -= lx_[p] * yi;
      const double lki = yi / d_[i];
      dk -= lki * yi;
      li_[p2] = k;
      lx_[p2] = lki;
      lnz_[i]++;
      touched.push_back(i);
    }
    if (kind_ == FactorKind::Cholesky) {
      if (!(dk > opt.singular_tol)) {
        const double s = scale_[static_cast<std::size_t>(order_[k])];
        throw FactorizationError(order_[k], dk / (s * s));
      }
    } else if (std::abs(dk) <= opt.delay_tol) {
      dead_[k] = 1;
      delayed_.push_back(k);
      for (int i : touched) lnz_[i]--;
      dk = 0.0;
    }
    d_[k] = dk;
  }
  for (int k = 0; k < ns; ++k) {
    lnz_total_ += static_cast<std::size_t>(lnz_[k]);
    if (dead_[k]) continue;
    (d_[k] > 0 ? inertia_.positive : inertia_.negative)++;
  }

  // dense trailing block
  tail_.assign(trailing.begin(), trailing.end());
  for (int k : delayed_) tail_.push_back(order_[k]);
  const int m = static_cast<int>(tail_.size());
  yp_.assign(static_cast<std::size_t>(m) + 1, 0);
  if (m == 0) return;
  std::vector<int> tpos(n, -1);
  for (int t = 0; t < m; ++t) tpos[static_cast<std::size_t>(tail_[t])] = t;
  // column access to the scaled matrix for tail indices
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(m));
  for (int i = 0; i < n_; ++i)
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      const int j = idx[p];
      const double v = val[p] * scale_[i] * scale_[j];
      if (tpos[i] >= 0) cols[tpos[i]].emplace_back(j, v);
      if (j != i && tpos[j] >= 0) cols[tpos[j]].emplace_back(i, v);
    }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> b(static_cast<std::size_t>(ns), 0.0);
  for (int t = 0; t < m; ++t) {
    std::fill(b.begin(), b.end(), 0.0);
    for (const auto& [j, v] : cols[t]) {
      if (tpos[j] >= 0) {
        S(tpos[j], t) += v;
        continue;
      }
      const int pj = pinv[j];
      if (pj >= 0 && !dead_[pj]) b[pj] += v;
    }
    forward(b);
    for (int k = 0; k < ns; ++k)
      if (b[k] != 0.0) {
        yi_.push_back(k);
        yx_.push_back(b[k]);
      }
    yp_[t + 1] = static_cast<int>(yi_.size());
  }
  std::vector<double> w(static_cast<std::size_t>(ns), 0.0);
  for (int a = 0; a < m; ++a) {
    for (int p = yp_[a]; p < yp_[a + 1]; ++p) w[yi_[p]] = yx_[p] / d_[yi_[p]];
    for (int c = 0; c <= a; ++c) {
      double s = 0.0;
      for (int p = yp_[c]; p < yp_[c + 1]; ++p) s += yx_[p] * w[yi_[p]];
      S(a, c) -= s;
      if (c != a) S(c, a) -= s;
    }
    for (int p = yp_[a]; p < yp_[a + 1]; ++p) w[yi_[p]] = 0.0;
  }
  try {
    dense_ = BunchKaufman(S, opt.singular_tol);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(tail_[static_cast<std::size_t>(e.index)]);
  }
  const Inertia di = dense_.inertia();
  inertia_.positive += di.positive;
  inertia_.negative += di.negative;
}

void SparseFactor::forward(std::span<double> x) const {
  const int ns = static_cast<int>(order_.size());
  for (int j = 0; j < ns; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (int p = lp_[j]; p < lp_[j] + lnz_[j]; ++p) x[li_[p]] -= lx_[p] * xj;
  }
}

void SparseFactor::backward(std::span<double> x) const {
  const int ns = static_cast<int>(order_.size());
  for (int j = ns - 1; j >= 0; --j) {
    double s = x[j];
    for (int p = lp_[j]; p < lp_[j] + lnz_[j]; ++p) s -= lx_[p] * x[li_[p]];
    x[j] = s;
  }
}

void SparseFactor::solve(std::span<double> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw DimensionMismatch("solve size mismatch");
  const int ns = static_cast<int>(order_.size());
  const int m = static_cast<int>(tail_.size());
  std::vector<double> bs(static_cast<std::size_t>(ns));
  for (int k = 0; k < ns; ++k) {
    const int o = order_[k];
    bs[k] = dead_[k] ? 0.0 : scale_[o] * x[o];
  }
  forward(bs);
  Eigen::VectorXd xt(m);
  for (int t = 0; t < m; ++t) {
    const int o = tail_[t];
    double s = scale_[o] * x[o];
    for (int p = yp_[t]; p < yp_[t + 1]; ++p) s -= yx_[p] * bs[yi_[p]] / d_[yi_[p]];
    xt(t) = s;
  }
  for (int k = 0; k < ns; ++k) bs[k] = dead_[k] ? 0.0 : bs[k] / d_[k];
  if (m > 0) {
    dense_.solve(xt);
    for (int t = 0; t < m; ++t)
      for (int p = yp_[t]; p < yp_[t + 1]; ++p) bs[yi_[p]] -= yx_[p] * xt(t) / d_[yi_[p]];
  }
  backward(bs);
  for (int k = 0; k < ns; ++k) {
    const int o = order_[k];
    x[o] = dead_[k] ? 0.0 : scale_[o] * bs[k];
  }
  for (int t = 0; t < m; ++t) x[tail_[t]] = scale_[tail_[t]] * xt(t);
}

void SparseFactor::solve(Eigen::MatrixXd& B) const {
  if (B.rows() != n_) throw DimensionMismatch("solve size mismatch");
  for (Eigen::Index c = 0; c < B.cols(); ++c) solve(std::span<double>(B.col(c).data(), static_cast<std::size_t>(n_)));
}

}  // namespace amrbddc::linalg
