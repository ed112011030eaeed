#include "amrbddc/bddc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <set>

#include "amrbddc/error.hpp"
#include "amrbddc/forest.hpp"

namespace amrbddc {

namespace {

using Key = std::vector<std::pair<int, int>>;

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Squared distance of x from the line through a and b.
double line_dist2(const std::array<double, 3>& x, const std::array<double, 3>& a, const std::array<double, 3>& b) {
  std::array<double, 3> d{}, v{};
  for (int k = 0; k < 3; ++k) {
    d[k] = b[k] - a[k];
    v[k] = x[k] - a[k];
  }
  const std::array<double, 3> c{d[1] * v[2] - d[2] * v[1], d[2] * v[0] - d[0] * v[2], d[0] * v[1] - d[1] * v[0]};
  const double dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  return dd > 0 ? (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) / dd : 0.0;
}

// Up to three well-spread, non-collinear nodes of the list.
std::vector<std::int64_t> pick_corners(const std::vector<std::int64_t>& nodes,
                                       const std::map<std::int64_t, std::array<double, 3>>& xyz) {
  if (nodes.size() <= 2) return nodes;
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (auto n : nodes)
    for (int k = 0; k < 3; ++k) c[k] += xyz.at(n)[k] / static_cast<double>(nodes.size());
  auto argmax = [&](auto&& score) {
    std::int64_t best = nodes.front();
    double bs = -1.0;
    for (auto n : nodes) {
      const double s = score(xyz.at(n));
      if (s > bs) {
        bs = s;
        best = n;
      }
    }
    return std::pair{best, bs};
  };
  const auto [n1, s1] = argmax([&](const auto& x) { return dist2(x, c); });
  const auto [n2, s2] = argmax([&](const auto& x) { return dist2(x, xyz.at(n1)); });
  (void)s1;
  std::vector<std::int64_t> out{n1};
  if (s2 <= 0.0) return out;
  out.push_back(n2);
  const auto [n3, s3] = argmax([&](const auto& x) { return line_dist2(x, xyz.at(n1), xyz.at(n2)); });
  if (s3 > 1e-18 * s2) out.push_back(n3);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<Glob> classify_globs(std::span<const SubdomainSystem> systems, const InterfaceMap& im, GlobOptions opt) {
  const std::size_t ng = im.gamma_dofs.size();
  std::vector<Key> keys(ng);
  std::vector<int> field(ng, 0);
  std::vector<std::array<double, 3>> xyz(ng);
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto& L = im.sub[s];
    for (std::size_t k = 0; k < L.interface.size(); ++k) {
      const int l = L.interface[k];
      const auto g = static_cast<std::size_t>(L.gamma_index[k]);
      for (int c : systems[s].components_of(l)) keys[g].emplace_back(static_cast<int>(s), c);
      field[g] = systems[s].field(l);
      xyz[g] = systems[s].coords[static_cast<std::size_t>(l)];
    }
  }
  for (auto& k : keys) std::sort(k.begin(), k.end());

  std::set<std::int64_t> corner_nodes;
  const int nc = systems.empty() ? 1 : systems[0].ncomp;
  if (opt.corners) {
    std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, std::vector<std::int64_t>> pairs;
    std::map<std::int64_t, std::array<double, 3>> node_xyz;
    std::int64_t last = -1;
    for (std::size_t g = 0; g < ng; ++g) {
      const std::int64_t node = im.gamma_dofs[g] / nc;
      if (node == last) continue;
      last = node;
      node_xyz[node] = xyz[g];
      const auto& k = keys[g];
      for (std::size_t a = 0; a < k.size(); ++a)
        for (std::size_t b = a + 1; b < k.size(); ++b) pairs[{k[a], k[b]}].push_back(node);
    }
    for (const auto& [pr, nodes] : pairs)
      for (auto n : pick_corners(nodes, node_xyz)) corner_nodes.insert(n);
  }

  std::vector<Glob> globs;
  std::map<std::pair<Key, int>, int> index;
  for (std::size_t g = 0; g < ng; ++g) {
    const std::int64_t node = im.gamma_dofs[g] / nc;
    if (corner_nodes.count(node)) {
      globs.push_back(Glob{GlobKind::Vertex, keys[g], field[g], {static_cast<int>(g)}});
      continue;
    }
    auto [it, inserted] = index.try_emplace({keys[g], field[g]}, static_cast<int>(globs.size()));
    if (inserted) globs.push_back(Glob{GlobKind::Face, keys[g], field[g], {}});
    globs[static_cast<std::size_t>(it->second)].gamma.push_back(static_cast<int>(g));
  }
  for (auto& gl : globs) {
    if (gl.gamma.size() == 1) gl.kind = GlobKind::Vertex;
    else if (gl.key.size() == 2) gl.kind = GlobKind::Face;
    else gl.kind = GlobKind::Edge;
  }
  return globs;
}

struct Bddc::Multilevel {
  std::vector<SubdomainSystem> systems;
  InterfaceMap im;
  std::unique_ptr<SchurComplement> schur;
  std::unique_ptr<Bddc> bddc;
  int n{0};

  void apply(std::span<const double> r, std::span<double> u) const {
    std::fill(u.begin(), u.end(), 0.0);
    std::vector<double> rg(im.gamma_dofs.size());
    for (std::size_t k = 0; k < rg.size(); ++k) rg[k] = r[static_cast<std::size_t>(im.gamma_dofs[k])];
    std::vector<std::vector<double>> u0(systems.size());
    std::vector<double> tg;
    for (std::size_t j = 0; j < systems.size(); ++j) {
      const auto& L = im.sub[j];
      const auto& S = systems[j];
      auto& ui = u0[j];
      ui.resize(L.interior.size());
      for (std::size_t k = 0; k < L.interior.size(); ++k)
        ui[k] = r[static_cast<std::size_t>(S.global_dofs[static_cast<std::size_t>(L.interior[k])])];
      if (ui.empty()) continue;
      schur->solve_interior(static_cast<int>(j), ui);
      tg.resize(L.interface.size());
      schur->apply_gi(static_cast<int>(j), ui, tg);
      for (std::size_t k = 0; k < L.interface.size(); ++k) rg[L.gamma_index[k]] -= tg[k];
    }
    std::vector<double> zg(rg.size());
    bddc->apply(rg, zg);
    std::vector<double> xl, ti;
    for (std::size_t j = 0; j < systems.size(); ++j) {
      const auto& L = im.sub[j];
      const auto& S = systems[j];
      if (L.interior.empty()) continue;
      xl.resize(L.interface.size());
      ti.resize(L.interior.size());
      for (std::size_t k = 0; k < L.interface.size(); ++k) xl[k] = zg[L.gamma_index[k]];
      schur->apply_ig(static_cast<int>(j), xl, ti);
      schur->solve_interior(static_cast<int>(j), ti);
      for (std::size_t k = 0; k < L.interior.size(); ++k)
        u[static_cast<std::size_t>(S.global_dofs[static_cast<std::size_t>(L.interior[k])])] = u0[j][k] - ti[k];
    }
    for (std::size_t k = 0; k < zg.size(); ++k) u[static_cast<std::size_t>(im.gamma_dofs[k])] = zg[k];
  }
};

Bddc::~Bddc() = default;

Bddc::Bddc(std::span<const SubdomainSystem> systems, const InterfaceMap& im, BddcOptions opt)
    : systems_(systems), im_(&im), opt_(opt) {
  if (im.sub.size() != systems.size()) throw DimensionMismatch("interface map does not match subdomains");
  globs_ = classify_globs(systems, im, GlobOptions{opt.corners});
  weights_ = interface_weights(systems, im, opt.weights);
  const std::size_t ns = systems.size();
  local_.resize(ns);

  std::vector<std::vector<int>> sub_globs(ns);
  for (std::size_t g = 0; g < globs_.size(); ++g) {
    int last = -1;
    for (const auto& [s, c] : globs_[g].key)
      if (s != last) {
        sub_globs[static_cast<std::size_t>(s)].push_back(static_cast<int>(g));
        last = s;
      }
  }
  std::vector<int> local_of_gamma(im.gamma_dofs.size(), -1);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& L = im.sub[s];
    const auto& S = systems[s];
    auto& loc = local_[s];
    for (std::size_t k = 0; k < L.interface.size(); ++k) local_of_gamma[L.gamma_index[k]] = L.interface[k];
    for (int g : sub_globs[s]) {
      const auto& gl = globs_[static_cast<std::size_t>(g)];
      CoarseRow row;
      row.coarse = g;
      const double w = 1.0 / static_cast<double>(gl.gamma.size());
      for (int gi : gl.gamma) row.entries.emplace_back(local_of_gamma[gi], w);
      loc.rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < L.interface.size(); ++k) local_of_gamma[L.gamma_index[k]] = -1;

    // floating components need at least kernel_dim constraints
    for (int c = 0; c < S.num_components; ++c) {
      if (S.component_anchored[static_cast<std::size_t>(c)]) continue;
      int count = 0;
      for (const auto& row : loc.rows) {
        const auto& key = globs_[static_cast<std::size_t>(row.coarse)].key;
        if (std::find(key.begin(), key.end(), std::pair{static_cast<int>(s), c}) != key.end()) ++count;
      }
      if (count < opt.kernel_dim) throw InsufficientConstraintsError(static_cast<int>(s), c, count, opt.kernel_dim);
    }

    const int n = S.size();
    const int m = static_cast<int>(loc.rows.size());
    std::vector<linalg::Triplet> t;
    const auto ptr = S.A.row_ptr();
    const auto idx = S.A.col_idx();
    const auto val = S.A.values();
    t.reserve(S.A.nnz() + 64);
    for (int i = 0; i < n; ++i)
      for (int p = ptr[i]; p < ptr[i + 1]; ++p) t.push_back({i, idx[p], val[p]});
    std::vector<int> mult(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      for (const auto& [l, w] : loc.rows[static_cast<std::size_t>(r)].entries) t.push_back({n + r, l, w});
      t.push_back({n + r, n + r, 0.0});
      mult[r] = n + r;
    }
    const auto K = linalg::SymSparse::from_triplets(n + m, std::move(t));
    auto t0 = std::chrono::steady_clock::now();
    try {
      loc.saddle = linalg::SparseFactor(K, linalg::FactorKind::LDLT, mult, opt.factor);
    } catch (const SingularMatrixError& e) {
      int comp = -1;
      if (e.index >= 0 && e.index < n) {
        const auto cs = S.components_of(static_cast<int>(e.index));
        if (!cs.empty()) comp = cs.front();
      }
      throw SaddleSingularError(static_cast<int>(s), comp);
    }
    const auto in = loc.saddle.inertia();
    if (in.positive != n || in.negative != m) throw SaddleSingularError(static_cast<int>(s), -1);
    loc.t_factor = seconds_since(t0);
    t_factor_ += loc.t_factor;

    t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n + m, m);
    for (int r = 0; r < m; ++r) X(n + r, r) = 1.0;
    loc.saddle.solve(X);
    loc.phi = X.topRows(n);
    loc.sc = -X.bottomRows(m);
    loc.sc = (0.5 * (loc.sc + loc.sc.transpose())).eval();
    loc.t_basis = seconds_since(t0);
    t_basis_ += loc.t_basis;
  }

  const int nc = coarse_size();
  if (nc == 0) return;
  auto t0 = std::chrono::steady_clock::now();
  if (opt.levels >= 3 && opt.level2_subdomains > 1 && static_cast<std::size_t>(opt.level2_subdomains) < ns) {
    auto ml = std::make_unique<Multilevel>();
    ml->n = nc;
    const Partition groups = partition_equal(ns, opt.level2_subdomains);
    for (int j = 0; j < groups.num_subdomains; ++j) {
      SubdomainSystem L2;
      L2.id = j;
      L2.ncomp = 1;
      std::vector<std::int64_t> ids;
      for (std::size_t i = groups.begin(j); i < groups.end(j); ++i)
        for (const auto& row : local_[i].rows) ids.push_back(row.coarse);
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      L2.global_dofs = ids;
      const int n2 = L2.size();
      // components: first-level subdomains linked through shared coarse dofs
      std::vector<int> parent(groups.end(j) - groups.begin(j));
      for (std::size_t a = 0; a < parent.size(); ++a) parent[a] = static_cast<int>(a);
      std::function<int(int)> find = [&](int x) { return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]); };
      std::vector<int> owner(static_cast<std::size_t>(n2), -1);
      std::vector<linalg::Triplet> t;
      for (std::size_t i = groups.begin(j); i < groups.end(j); ++i) {
        const int me = static_cast<int>(i - groups.begin(j));
        const auto& rows = local_[i].rows;
        std::vector<int> li(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          li[r] = L2.local_of(rows[r].coarse);
          int& o = owner[static_cast<std::size_t>(li[r])];
          if (o < 0) o = me;
          else parent[static_cast<std::size_t>(find(me))] = find(o);
        }
        for (std::size_t a = 0; a < rows.size(); ++a)
          for (std::size_t b = 0; b < rows.size(); ++b)
            if (li[a] >= li[b]) t.push_back({li[a], li[b], local_[i].sc(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
      }
      L2.A = linalg::SymSparse::from_triplets(n2, std::move(t));
      std::map<int, int> label;
      std::vector<int> sub_comp(parent.size());
      for (std::size_t a = 0; a < parent.size(); ++a) {
        const int r = find(static_cast<int>(a));
        auto [it, ins] = label.try_emplace(r, static_cast<int>(label.size()));
        sub_comp[a] = it->second;
      }
      L2.num_components = static_cast<int>(label.size());
      L2.component_anchored.assign(label.size(), 0);
      for (std::size_t i = groups.begin(j); i < groups.end(j); ++i) {
        const auto& S1 = systems[i];
        bool anchored = false;
        for (char a : S1.component_anchored) anchored = anchored || a;
        if (anchored) L2.component_anchored[static_cast<std::size_t>(sub_comp[i - groups.begin(j)])] = 1;
      }
      L2.comp_ptr.assign(static_cast<std::size_t>(n2) + 1, 0);
      for (int l = 0; l < n2; ++l) {
        L2.comp_list.push_back(sub_comp[static_cast<std::size_t>(owner[static_cast<std::size_t>(l)])]);
        L2.comp_ptr[static_cast<std::size_t>(l) + 1] = l + 1;
      }
      L2.fields.resize(static_cast<std::size_t>(n2));
      L2.coords.assign(static_cast<std::size_t>(n2), {0.0, 0.0, 0.0});
      for (int l = 0; l < n2; ++l)
        L2.fields[static_cast<std::size_t>(l)] = globs_[static_cast<std::size_t>(ids[static_cast<std::size_t>(l)])].field;
      L2.f.assign(static_cast<std::size_t>(n2), 0.0);
      ml->systems.push_back(std::move(L2));
    }
    ml->im = classify_interface(std::span<const SubdomainSystem>(ml->systems));
    ml->schur = std::make_unique<SchurComplement>(std::span<const SubdomainSystem>(ml->systems), ml->im);
    BddcOptions o2 = opt;
    o2.levels = 2;
    o2.corners = false;
    ml->bddc = std::make_unique<Bddc>(std::span<const SubdomainSystem>(ml->systems), ml->im, o2);
    level2_ = std::move(ml);
  } else {
    std::vector<linalg::Triplet> t;
    for (const auto& loc : local_)
      for (std::size_t a = 0; a < loc.rows.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b)
          t.push_back({loc.rows[a].coarse, loc.rows[b].coarse, loc.sc(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
    coarse_ = linalg::SparseFactor(linalg::SymSparse::from_triplets(nc, std::move(t)), linalg::FactorKind::Cholesky);
  }
  t_factor_ += seconds_since(t0);
}

void Bddc::local_solve(int s, std::span<double> u) const {
  const auto& loc = local_[static_cast<std::size_t>(s)];
  const std::size_t n = u.size();
  std::vector<double> x(n + loc.rows.size(), 0.0);
  std::copy(u.begin(), u.end(), x.begin());
  loc.saddle.solve(x);
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), u.begin());
}

void Bddc::coarse_solve(std::span<const double> r, std::span<double> u) const {
  if (level2_) {
    level2_->apply(r, u);
    return;
  }
  std::copy(r.begin(), r.end(), u.begin());
  if (!u.empty()) coarse_.solve(u);
}

void Bddc::apply(std::span<const double> r, std::span<double> z) const {
  if (r.size() != static_cast<std::size_t>(im_->size()) || z.size() != r.size())
    throw DimensionMismatch("preconditioner operand size");
  const std::size_t ns = systems_.size();
  std::vector<double> rc(static_cast<std::size_t>(coarse_size()), 0.0);
  std::vector<std::vector<double>> u(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& L = im_->sub[s];
    const auto& loc = local_[s];
    auto& ui = u[s];
    ui.assign(static_cast<std::size_t>(systems_[s].size()), 0.0);
    for (std::size_t k = 0; k < L.interface.size(); ++k) ui[L.interface[k]] = weights_[s][k] * r[L.gamma_index[k]];
    if (!loc.rows.empty()) {
      const Eigen::VectorXd pr = loc.phi.transpose() * Eigen::Map<const Eigen::VectorXd>(ui.data(), static_cast<Eigen::Index>(ui.size()));
      for (std::size_t k = 0; k < loc.rows.size(); ++k) rc[static_cast<std::size_t>(loc.rows[k].coarse)] += pr(static_cast<Eigen::Index>(k));
    }
    local_solve(static_cast<int>(s), ui);
  }
  std::vector<double> uc(rc.size(), 0.0);
  coarse_solve(rc, uc);
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& L = im_->sub[s];
    const auto& loc = local_[s];
    auto& ui = u[s];
    if (!loc.rows.empty()) {
      Eigen::VectorXd ucl(static_cast<Eigen::Index>(loc.rows.size()));
      for (std::size_t k = 0; k < loc.rows.size(); ++k) ucl(static_cast<Eigen::Index>(k)) = uc[static_cast<std::size_t>(loc.rows[k].coarse)];
      Eigen::Map<Eigen::VectorXd>(ui.data(), static_cast<Eigen::Index>(ui.size())) += loc.phi * ucl;
    }
    for (std::size_t k = 0; k < L.interface.size(); ++k) z[L.gamma_index[k]] += weights_[s][k] * ui[L.interface[k]];
  }
}

std::vector<int> Bddc::local_coarse_counts(bool faces_and_edges_only) const {
  std::vector<int> out;
  for (const auto& loc : local_) {
    int c = 0;
    for (const auto& row : loc.rows)
      if (!faces_and_edges_only || globs_[static_cast<std::size_t>(row.coarse)].kind != GlobKind::Vertex) ++c;
    out.push_back(c);
  }
  return out;
}

void Bddc::write_diagnostics(std::ostream& os, int s) const {
  const auto& loc = local_[static_cast<std::size_t>(s)];
  const auto prec = os.precision(17);
  os << "# subdomain " << s << " local_dofs " << systems_[static_cast<std::size_t>(s)].size() << " constraints "
     << loc.rows.size() << '\n';
  os << "constraints\n";
  for (const auto& row : loc.rows) {
    os << row.coarse;
    for (const auto& [l, w] : row.entries) os << ' ' << l << ':' << w;
    os << '\n';
  }
  os << "phi " << loc.phi.rows() << ' ' << loc.phi.cols() << '\n';
  for (Eigen::Index i = 0; i < loc.phi.rows(); ++i) {
    for (Eigen::Index j = 0; j < loc.phi.cols(); ++j) os << (j ? " " : "") << loc.phi(i, j);
    os << '\n';
  }
  os << "coarse_matrix " << loc.sc.rows() << '\n';
  for (Eigen::Index i = 0; i < loc.sc.rows(); ++i) {
    for (Eigen::Index j = 0; j < loc.sc.cols(); ++j) os << (j ? " " : "") << loc.sc(i, j);
    os << '\n';
  }
  const auto in = loc.saddle.inertia();
  os << "inertia " << in.positive << ' ' << in.negative << ' ' << in.zero << '\n';
  os.precision(prec);
}

void Bddc::write_local_properties(std::ostream& os) const {
  os << "subdomain,n_dofs,n_components,n_coarse,factor_time,solve_time\n";
  for (std::size_t s = 0; s < local_.size(); ++s)
    os << s << ',' << systems_[s].size() << ',' << systems_[s].num_components << ',' << local_[s].rows.size() << ','
       << local_[s].t_factor << ',' << local_[s].t_basis << '\n';
}

}  // namespace amrbddc
