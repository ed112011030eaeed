#include "amrbddc/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "amrbddc/basis.hpp"
#include "amrbddc/error.hpp"

namespace amrbddc {

ReferenceElement::ReferenceElement(int dim, int order) : dim_(dim), order_(order), xi_(basis::lobatto_points(order)) {
  npe_ = 1;
  for (int a = 0; a < dim; ++a) npe_ *= order + 1;
}

void ReferenceElement::evaluate(const std::array<double, 3>& s, Eigen::VectorXd& phi, Eigen::MatrixXd& dphi) const {
  std::array<std::vector<double>, 3> v, d;
  for (int a = 0; a < dim_; ++a) {
    v[a] = basis::lagrange_values(xi_, s[a]);
    d[a] = basis::lagrange_derivatives(xi_, s[a]);
  }
  phi.resize(npe_);
  dphi.resize(npe_, dim_);
  for (int i = 0; i < npe_; ++i) {
    const auto t = local_index(i, order_, dim_);
    double val = 1.0;
    for (int a = 0; a < dim_; ++a) val *= v[a][t[a]];
    phi(i) = val;
    for (int a = 0; a < dim_; ++a) {
      double g = d[a][t[a]];
      for (int b = 0; b < dim_; ++b)
        if (b != a) g *= v[b][t[b]];
      dphi(i, a) = g;
    }
  }
}

namespace {
// Calls fn(point, weight) over the tensor Gauss rule with n points per axis.
template <class Fn>
void for_each_qp(int dim, int n, Fn&& fn) {
  const auto q = basis::gauss(n);
  const int total = dim == 2 ? n * n : n * n * n;
  for (int k = 0; k < total; ++k) {
    std::array<double, 3> s{0.0, 0.0, 0.0};
    double w = 1.0;
    int r = k;
    for (int a = 0; a < dim; ++a) {
      s[a] = q.points[static_cast<std::size_t>(r % n)];
      w *= q.weights[static_cast<std::size_t>(r % n)];
      r /= n;
    }
    fn(s, w);
  }
}
}  // namespace

Eigen::MatrixXd ReferenceElement::laplace() const {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(npe_, npe_);
  Eigen::VectorXd phi;
  Eigen::MatrixXd G;
  for_each_qp(dim_, order_ + 1, [&](const std::array<double, 3>& s, double w) {
    evaluate(s, phi, G);
    K.noalias() += w * G * G.transpose();
  });
  return K;
}

Eigen::MatrixXd ReferenceElement::elasticity(double lambda, double mu) const {
  const int d = dim_;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(npe_ * d, npe_ * d);
  Eigen::VectorXd phi;
  Eigen::MatrixXd G;
  for_each_qp(dim_, order_ + 1, [&](const std::array<double, 3>& s, double w) {
    evaluate(s, phi, G);
    const Eigen::MatrixXd GG = G * G.transpose();
    for (int i = 0; i < npe_; ++i)
      for (int j = 0; j < npe_; ++j)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            double v = lambda * G(i, c) * G(j, e) + mu * G(i, e) * G(j, c);
            if (c == e) v += mu * GG(i, j);
            K(i * d + c, j * d + e) += w * v;
          }
  });
  return K;
}

Eigen::VectorXd ReferenceElement::integrals() const {
  Eigen::VectorXd I = Eigen::VectorXd::Zero(npe_);
  Eigen::VectorXd phi;
  Eigen::MatrixXd G;
  for_each_qp(dim_, order_ + 1, [&](const std::array<double, 3>& s, double w) {
    evaluate(s, phi, G);
    I += w * phi;
  });
  return I;
}

Eigen::MatrixXd element_poisson(int dim, int order, double h) {
  return ReferenceElement(dim, order).laplace() * std::pow(h, dim - 2);
}

Eigen::MatrixXd element_elasticity(int dim, int order, double h, double lambda, double mu) {
  return ReferenceElement(dim, order).elasticity(lambda, mu) * std::pow(h, dim - 2);
}

Eigen::VectorXd element_load(const Problem& pb, const ReferenceElement& ref, const std::array<double, 3>& x0, double h) {
  const int d = ref.dim();
  const double vol = std::pow(h, d);
  if (pb.kind == ProblemKind::Elasticity) {
    const Eigen::VectorXd I = ref.integrals();
    Eigen::VectorXd f(ref.nodes() * d);
    for (int i = 0; i < ref.nodes(); ++i)
      for (int c = 0; c < d; ++c) f(i * d + c) = vol * I(i) * pb.force[c];
    return f;
  }
  if (!pb.variable_source()) return vol * pb.source(x0) * ref.integrals();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ref.nodes());
  Eigen::VectorXd phi;
  Eigen::MatrixXd G;
  for_each_qp(d, ref.order() + 3, [&](const std::array<double, 3>& s, double w) {
    ref.evaluate(s, phi, G);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) x[a] = x0[a] + h * s[a];
    f += (w * vol * pb.source(x)) * phi;
  });
  return f;
}

void transform_element(Eigen::MatrixXd& A, Eigen::VectorXd& f, const Eigen::MatrixXd& T, int ncomp) {
  Eigen::MatrixXd Tf = T;
  if (ncomp > 1) {
    Tf = Eigen::MatrixXd::Zero(T.rows() * ncomp, T.cols() * ncomp);
    for (Eigen::Index i = 0; i < T.rows(); ++i)
      for (Eigen::Index j = 0; j < T.cols(); ++j)
        if (T(i, j) != 0.0)
          for (int c = 0; c < ncomp; ++c) Tf(i * ncomp + c, j * ncomp + c) = T(i, j);
  }
  if (A.rows() != Tf.rows()) throw DimensionMismatch("transition size does not match element matrix");
  A = (Tf.transpose() * A * Tf).eval();
  f = (Tf.transpose() * f).eval();
}

int SubdomainSystem::local_of(std::int64_t g) const {
  const auto it = std::lower_bound(global_dofs.begin(), global_dofs.end(), g);
  if (it == global_dofs.end() || *it != g) return -1;
  return static_cast<int>(it - global_dofs.begin());
}

std::size_t GlobalDofs::num_free() const {
  std::size_t n = 0;
  for (char d : dirichlet) n += d ? 0 : 1;
  return n;
}

GlobalDofs dirichlet_data(const DofMap& dm, const Problem& pb) {
  GlobalDofs g;
  g.ncomp = pb.components();
  g.num_dofs = dm.num_nodes() * static_cast<std::size_t>(g.ncomp);
  g.dirichlet.assign(g.num_dofs, 0);
  g.values.assign(g.num_dofs, 0.0);
  for (std::size_t n = 0; n < dm.num_nodes(); ++n) {
    if (!dm.node_on_boundary[n]) continue;
    for (int c = 0; c < g.ncomp; ++c) {
      const std::size_t k = n * static_cast<std::size_t>(g.ncomp) + static_cast<std::size_t>(c);
      g.dirichlet[k] = 1;
      g.values[k] = pb.dirichlet(dm.node_coords[n], c);
    }
  }
  return g;
}

Assembler::Assembler(const Forest& f, const DofMap& dm, const Problem& pb)
    : forest_(f), dm_(dm), pb_(pb), ref_(f.dim(), dm.order), dofs_(dirichlet_data(dm, pb)) {
  if (pb.dim != f.dim()) throw DimensionMismatch("problem and forest dimensions differ");
  kref_ = pb.kind == ProblemKind::Elasticity ? ref_.elasticity(pb.lame_lambda(), pb.lame_mu()) : ref_.laplace();
  iref_ = ref_.integrals();
}

void Assembler::element_system(std::size_t e, Eigen::MatrixXd& K, Eigen::VectorXd& f) const {
  const CellKey& c = forest_.leaf(e);
  const double h = forest_.physical_size(c.level);
  K = kref_ * std::pow(h, forest_.dim() - 2);
  f = element_load(pb_, ref_, forest_.physical_corner(c), h);
  if (dm_.is_constrained(e)) transform_element(K, f, build_transition(dm_, e), pb_.components());
}

SubdomainSystem Assembler::assemble_range(const std::vector<std::size_t>& elements, const std::vector<int>& comp, int id) const {
  const int nc = pb_.components();
  const int npe = dm_.nodes_per_element;
  SubdomainSystem S;
  S.id = id;
  S.ncomp = nc;
  S.elements = elements;
  auto gdof = [&](std::size_t e, int slot, int c) {
    return dm_.element(e)[static_cast<std::size_t>(slot)] * nc + c;
  };
  for (std::size_t e : elements)
    for (int i = 0; i < npe; ++i)
      for (int c = 0; c < nc; ++c) {
        const auto g = gdof(e, i, c);
        if (!dofs_.dirichlet[static_cast<std::size_t>(g)]) S.global_dofs.push_back(g);
      }
  std::sort(S.global_dofs.begin(), S.global_dofs.end());
  S.global_dofs.erase(std::unique(S.global_dofs.begin(), S.global_dofs.end()), S.global_dofs.end());
  const int n = S.size();

  int ncomps = 0;
  for (int c : comp) ncomps = std::max(ncomps, c + 1);
  S.num_components = std::max(ncomps, 1);
  S.component_anchored.assign(static_cast<std::size_t>(S.num_components), 0);
  std::vector<std::pair<int, int>> dc;
  std::vector<linalg::Triplet> trip;
  S.f.assign(static_cast<std::size_t>(n), 0.0);
  Eigen::MatrixXd K;
  Eigen::VectorXd fe;
  std::vector<int> loc(static_cast<std::size_t>(npe * nc));
  std::vector<std::int64_t> glob(static_cast<std::size_t>(npe * nc));
  for (std::size_t k = 0; k < elements.size(); ++k) {
    const std::size_t e = elements[k];
    element_system(e, K, fe);
    const int ec = comp[k];
    for (int i = 0; i < npe; ++i)
      for (int c = 0; c < nc; ++c) {
        const std::size_t a = static_cast<std::size_t>(i * nc + c);
        glob[a] = gdof(e, i, c);
        if (dofs_.dirichlet[static_cast<std::size_t>(glob[a])]) {
          loc[a] = -1;
          S.component_anchored[static_cast<std::size_t>(ec)] = 1;
        } else {
          loc[a] = S.local_of(glob[a]);
          dc.emplace_back(loc[a], ec);
        }
      }
    const int m = npe * nc;
    for (int a = 0; a < m; ++a) {
      const int la = loc[a];
      if (la < 0) continue;
      S.f[la] += fe(a);
      for (int b = 0; b < m; ++b) {
        const int lb = loc[b];
        if (lb < 0) {
          S.f[la] -= K(a, b) * dofs_.values[static_cast<std::size_t>(glob[b])];
        } else if (la >= lb && K(a, b) != 0.0) {
          trip.push_back({la, lb, K(a, b)});
        }
      }
    }
  }
  S.A = linalg::SymSparse::from_triplets(n, std::move(trip));
  std::sort(dc.begin(), dc.end());
  dc.erase(std::unique(dc.begin(), dc.end()), dc.end());
  S.comp_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [l, c] : dc) {
    S.comp_list.push_back(c);
    S.comp_ptr[static_cast<std::size_t>(l) + 1]++;
  }
  for (int i = 0; i < n; ++i) S.comp_ptr[i + 1] += S.comp_ptr[i];
  S.coords.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) S.coords[i] = dm_.node_coords[static_cast<std::size_t>(S.global_dofs[i] / nc)];
  return S;
}

SubdomainSystem Assembler::subassemble(const Partition& part, const ComponentLabeling& comps, int s) const {
  std::vector<std::size_t> el;
  std::vector<int> cp;
  for (std::size_t e = part.begin(s); e < part.end(s); ++e) {
    el.push_back(e);
    cp.push_back(comps.component[e]);
  }
  SubdomainSystem S = assemble_range(el, cp, s);
  S.num_components = comps.num_components[static_cast<std::size_t>(s)];
  S.component_anchored.resize(static_cast<std::size_t>(S.num_components), 0);
  return S;
}

std::vector<SubdomainSystem> Assembler::subassemble_all(const Partition& part, const ComponentLabeling& comps) const {
  std::vector<SubdomainSystem> out;
  out.reserve(static_cast<std::size_t>(part.num_subdomains));
  for (int s = 0; s < part.num_subdomains; ++s) out.push_back(subassemble(part, comps, s));
  return out;
}

SubdomainSystem Assembler::assemble_global() const {
  std::vector<std::size_t> el(forest_.size());
  for (std::size_t e = 0; e < el.size(); ++e) el[e] = e;
  return assemble_range(el, std::vector<int>(el.size(), 0), 0);
}

void write_subdomain_system(std::ostream& os, const SubdomainSystem& s) {
  const auto prec = os.precision(17);
  os << "# subdomain " << s.id << '\n';
  os << "matrix\n";
  linalg::write_coo(os, s.A);
  os << "rhs " << s.f.size() << '\n';
  for (double v : s.f) os << v << '\n';
  os << "map " << s.global_dofs.size() << '\n';
  for (std::size_t i = 0; i < s.global_dofs.size(); ++i) os << i << ' ' << s.global_dofs[i] << '\n';
  os.precision(prec);
}

SubdomainSystem read_subdomain_system(std::istream& is, int ncomp) {
  SubdomainSystem s;
  s.ncomp = ncomp;
  std::string tag;
  if (!(is >> tag) || tag != "#" || !(is >> tag) || tag != "subdomain" || !(is >> s.id))
    throw InvalidArgument("subdomain dump: missing header");
  if (!(is >> tag) || tag != "matrix") throw InvalidArgument("subdomain dump: missing matrix block");
  s.A = linalg::read_coo(is);
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "rhs" || n != static_cast<std::size_t>(s.A.rows()))
    throw InvalidArgument("subdomain dump: bad rhs block");
  s.f.resize(n);
  for (auto& v : s.f)
    if (!(is >> v)) throw InvalidArgument("subdomain dump: truncated rhs");
  if (!(is >> tag >> n) || tag != "map" || n != s.f.size()) throw InvalidArgument("subdomain dump: bad map block");
  s.global_dofs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t li = 0;
    if (!(is >> li >> s.global_dofs[i]) || li != i) throw InvalidArgument("subdomain dump: bad map entry");
  }
  s.comp_ptr.resize(n + 1);
  s.comp_list.assign(n, 0);
  for (std::size_t i = 0; i <= n; ++i) s.comp_ptr[i] = static_cast<int>(i);
  s.component_anchored.assign(1, 0);
  s.coords.assign(n, {0.0, 0.0, 0.0});
  return s;
}

}  // namespace amrbddc
