#include "amrbddc/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "amrbddc/assembly.hpp"
#include "amrbddc/basis.hpp"
#include "amrbddc/error.hpp"

namespace amrbddc {

ErrorEstimate estimate_error(const Forest& f, const DofMap& dm, const Problem& pb, std::span<const double> u) {
  if (!pb.has_exact()) throw InvalidArgument("error estimate needs an exact solution");
  return estimate_error(
      f, dm, [&](const std::array<double, 3>& x) { return pb.exact(x); },
      [&](const std::array<double, 3>& x) { return pb.exact_gradient(x); }, u);
}

ErrorEstimate estimate_error(const Forest& f, const DofMap& dm, const ScalarField& exact, const GradientField& gradient,
                             std::span<const double> u) {
  if (u.size() != dm.num_nodes()) throw DimensionMismatch("solution size differs from node count");
  const int d = f.dim();
  const ReferenceElement ref(d, dm.order);
  const int npe = ref.nodes();
  const int nq = dm.order + 2;
  const auto q = basis::gauss(nq);
  const int total = d == 2 ? nq * nq : nq * nq * nq;
  std::vector<std::array<double, 3>> pts(static_cast<std::size_t>(total));
  std::vector<double> wts(static_cast<std::size_t>(total));
  std::vector<Eigen::VectorXd> phi(static_cast<std::size_t>(total));
  std::vector<Eigen::MatrixXd> dphi(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) {
    std::array<double, 3> s{0.0, 0.0, 0.0};
    double w = 1.0;
    for (int a = 0, r = k; a < d; ++a, r /= nq) {
      s[a] = q.points[static_cast<std::size_t>(r % nq)];
      w *= q.weights[static_cast<std::size_t>(r % nq)];
    }
    const auto kk = static_cast<std::size_t>(k);
    pts[kk] = s;
    wts[kk] = w;
    ref.evaluate(s, phi[kk], dphi[kk]);
  }

  ErrorEstimate est;
  est.eta.resize(f.size());
  double l2 = 0.0, h1 = 0.0;
  Eigen::VectorXd v(npe);
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto nodes = dm.element(e);
    for (int i = 0; i < npe; ++i) v(i) = u[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])];
    for (const auto& row : dm.element_constraints(e)) {
      double s = 0.0;
      for (const auto& [j, w] : row.weights) s += w * u[static_cast<std::size_t>(nodes[static_cast<std::size_t>(j)])];
      v(row.local) = s;
    }
    const CellKey& c = f.leaf(e);
    const double h = f.physical_size(c.level);
    const auto x0 = f.physical_corner(c);
    const double vol = std::pow(h, d);
    double el2 = 0.0, eh1 = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      std::array<double, 3> x{0.0, 0.0, 0.0};
      for (int a = 0; a < d; ++a) x[a] = x0[a] + h * pts[k][a];
      const double diff = phi[k].dot(v) - exact(x);
      const Eigen::VectorXd g = dphi[k].transpose() * v / h;
      const auto ge = gradient(x);
      double gd = 0.0;
      for (int a = 0; a < d; ++a) gd += (g(a) - ge[a]) * (g(a) - ge[a]);
      el2 += wts[k] * vol * diff * diff;
      eh1 += wts[k] * vol * gd;
    }
    est.eta[e] = std::sqrt(eh1);
    l2 += el2;
    h1 += eh1;
  }
  est.l2 = std::sqrt(l2);
  est.h1 = std::sqrt(h1);
  return est;
}

std::vector<char> mark_threshold(std::span<const double> eta, double theta) {
  std::vector<char> m(eta.size(), 0);
  if (eta.empty()) return m;
  const double cut = theta * *std::max_element(eta.begin(), eta.end());
  for (std::size_t i = 0; i < eta.size(); ++i) m[i] = eta[i] > cut;
  return m;
}

HistogramMarking mark_fraction_histogram(std::span<const double> eta, double zeta, int bins) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw InvalidArgument("fraction must lie in (0, 1)");
  if (bins < 2) throw InvalidArgument("at least two histogram bins required");
  HistogramMarking hm;
  hm.counts.assign(static_cast<std::size_t>(bins), 0);
  hm.marked.assign(eta.size(), 0);
  if (eta.empty()) return hm;
  const double emax = *std::max_element(eta.begin(), eta.end());
  if (!(emax > 0.0)) return hm;
  hm.bin_width = emax / bins;
  for (double x : eta) {
    const auto m = static_cast<long long>(std::ceil(x * bins / emax));
    ++hm.counts[static_cast<std::size_t>(std::clamp<long long>(m, 1, bins) - 1)];
  }
  const double need = zeta * static_cast<double>(eta.size());
  std::int64_t tail = 0;
  int mbar = 1;
  for (int m = bins; m >= 1; --m) {
    tail += hm.counts[static_cast<std::size_t>(m - 1)];
    if (static_cast<double>(tail) >= need) {
      mbar = m;
      break;
    }
  }
  hm.theta_hat = (mbar - 1) * hm.bin_width;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    hm.marked[i] = eta[i] > hm.theta_hat;
    hm.num_marked += static_cast<std::size_t>(hm.marked[i]);
  }
  return hm;
}

std::vector<AdaptStep> adapt_loop(const Problem& pb, Forest forest, const AdaptOptions& opt, Forest* last) {
  std::vector<AdaptStep> rows;
  for (int step = 0; step <= opt.steps; ++step) {
    const DofMap dm = enumerate_dofs(forest, opt.order);
    SolverOptions so = opt.solver;
    so.num_subdomains = std::min<int>(so.num_subdomains, static_cast<int>(forest.size()));
    const SolveReport rep = solve(forest, dm, pb, so);
    const ErrorEstimate est = estimate_error(forest, dm, pb, rep.solution);
    rows.push_back(AdaptStep{step, forest.size(), rep.n, rep.n_gamma, rep.n_coarse, rep.iterations, rep.t_setup,
                             rep.t_pcg, est.l2, est.h1});
    if (step == opt.steps) break;
    const auto hm = mark_fraction_histogram(est.eta, opt.zeta, opt.bins);
    forest = balance_2to1(refine(forest, hm.marked));
  }
  if (last) *last = std::move(forest);
  return rows;
}

void write_adapt_csv(std::ostream& os, const std::vector<AdaptStep>& rows) {
  const auto prec = os.precision(10);
  os << "step,n_elements,n_dofs,n_gamma,n_coarse,iterations,setup_time,pcg_time,L2_error,H1_error\n";
  for (const auto& r : rows)
    os << r.step << ',' << r.n_elements << ',' << r.n_dofs << ',' << r.n_gamma << ',' << r.n_coarse << ','
       << r.iterations << ',' << r.setup_time << ',' << r.pcg_time << ',' << r.l2_error << ',' << r.h1_error << '\n';
  os.precision(prec);
}

}  // namespace amrbddc
