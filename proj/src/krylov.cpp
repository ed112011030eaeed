#include "amrbddc/krylov.hpp"

#include <cmath>
#include <ostream>

#include "amrbddc/error.hpp"
#include "amrbddc/linalg/vector_ops.hpp"

namespace amrbddc {

PcgResult pcg(const LinearOperator& op, const LinearOperator& precond, std::span<const double> g, PcgOptions opt) {
  const std::size_t n = g.size();
  PcgResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(g.begin(), g.end()), z(n), p(n), q(n);
  const double r0 = linalg::norm2(r);
  res.history.push_back(1.0);
  if (r0 == 0.0) {
    res.converged = true;
    return res;
  }
  precond(r, z);
  p = z;
  double rz = linalg::dot(r, z);
  for (int k = 1; k <= opt.max_iterations; ++k) {
    op(p, q);
    const double pq = linalg::dot(p, q);
    if (!(pq > 0.0)) throw IndefiniteOperatorError(k, pq);
    const double alpha = rz / pq;
    linalg::axpy(alpha, p, res.x);
    linalg::axpy(-alpha, q, r);
    const double rel = linalg::norm2(r) / r0;
    res.history.push_back(rel);
    res.iterations = k;
    if (rel <= opt.tol) {
      res.converged = true;
      break;
    }
    precond(r, z);
    const double rz_new = linalg::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

void write_residual_csv(std::ostream& os, const PcgResult& r) {
  const auto prec = os.precision(17);
  os << "iteration,relative_residual\n";
  for (std::size_t k = 0; k < r.history.size(); ++k) os << k << ',' << r.history[k] << '\n';
  os.precision(prec);
}

}  // namespace amrbddc
