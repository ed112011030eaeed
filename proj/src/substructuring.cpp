#include "amrbddc/substructuring.hpp"

#include <algorithm>

#include "amrbddc/error.hpp"

namespace amrbddc {

InterfaceMap classify_interface(const std::vector<std::vector<std::int64_t>>& sub_dofs) {
  InterfaceMap im;
  std::vector<std::int64_t> all;
  for (const auto& v : sub_dofs) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < all.size();) {
    std::size_t j = k;
    while (j < all.size() && all[j] == all[k]) ++j;
    if (j - k >= 2) {
      im.gamma_dofs.push_back(all[k]);
      im.multiplicity.push_back(static_cast<int>(j - k));
    }
    k = j;
  }
  im.sub.resize(sub_dofs.size());
  for (std::size_t s = 0; s < sub_dofs.size(); ++s) {
    const auto& v = sub_dofs[s];
    auto& L = im.sub[s];
    for (std::size_t l = 0; l < v.size(); ++l) {
      if (l > 0 && v[l] <= v[l - 1]) throw InvalidArgument("subdomain dof lists must be sorted and unique");
      const auto it = std::lower_bound(im.gamma_dofs.begin(), im.gamma_dofs.end(), v[l]);
      if (it != im.gamma_dofs.end() && *it == v[l]) {
        L.interface.push_back(static_cast<int>(l));
        L.gamma_index.push_back(static_cast<int>(it - im.gamma_dofs.begin()));
      } else {
        L.interior.push_back(static_cast<int>(l));
      }
    }
  }
  return im;
}

InterfaceMap classify_interface(std::span<const SubdomainSystem> systems) {
  std::vector<std::vector<std::int64_t>> d;
  d.reserve(systems.size());
  for (const auto& s : systems) d.push_back(s.global_dofs);
  return classify_interface(d);
}

InterfaceMap classify_interface(const DofMap& dm, const Partition& part, const GlobalDofs& dofs) {
  std::vector<std::vector<std::int64_t>> d(static_cast<std::size_t>(part.num_subdomains));
  for (int s = 0; s < part.num_subdomains; ++s) {
    auto& v = d[static_cast<std::size_t>(s)];
    for (std::size_t e = part.begin(s); e < part.end(s); ++e)
      for (auto n : dm.element(e))
        for (int c = 0; c < dofs.ncomp; ++c) {
          const auto g = n * dofs.ncomp + c;
          if (!dofs.dirichlet[static_cast<std::size_t>(g)]) v.push_back(g);
        }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return classify_interface(d);
}

std::vector<std::vector<double>> interface_weights(std::span<const SubdomainSystem> systems, const InterfaceMap& im,
                                                   WeightKind kind) {
  std::vector<std::vector<double>> w(systems.size());
  std::vector<double> denom(im.gamma_dofs.size(), 0.0);
  auto local_weight = [&](std::size_t s, int l) {
    return kind == WeightKind::Cardinality ? 1.0 : systems[s].A.diagonal(l);
  };
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto& L = im.sub[s];
    for (std::size_t k = 0; k < L.interface.size(); ++k) denom[L.gamma_index[k]] += local_weight(s, L.interface[k]);
  }
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto& L = im.sub[s];
    w[s].resize(L.interface.size());
    for (std::size_t k = 0; k < L.interface.size(); ++k) w[s][k] = local_weight(s, L.interface[k]) / denom[L.gamma_index[k]];
  }
  return w;
}

SchurComplement::SchurComplement(std::span<const SubdomainSystem> systems, const InterfaceMap& im)
    : systems_(systems), im_(&im) {
  if (im.sub.size() != systems.size()) throw DimensionMismatch("interface map does not match subdomains");
  blocks_.resize(systems.size());
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto& L = im.sub[s];
    auto& B = blocks_[s];
    B.aii = systems[s].A.principal(L.interior);
    B.agg = systems[s].A.principal(L.interface);
    B.aig = linalg::extract_block(systems[s].A, L.interior, L.interface);
    if (!L.interior.empty()) B.fii = linalg::SparseFactor(B.aii, linalg::FactorKind::Cholesky);
  }
}

void SchurComplement::solve_interior(int s, std::span<double> x) const {
  if (!x.empty()) blocks_[static_cast<std::size_t>(s)].fii.solve(x);
}

void SchurComplement::apply_ig(int s, std::span<const double> x, std::span<double> y) const {
  blocks_[static_cast<std::size_t>(s)].aig.multiply(x, y);
}

void SchurComplement::apply_gi(int s, std::span<const double> x, std::span<double> y) const {
  blocks_[static_cast<std::size_t>(s)].aig.multiply_transpose(x, y);
}

void SchurComplement::apply_gg(int s, std::span<const double> x, std::span<double> y) const {
  blocks_[static_cast<std::size_t>(s)].agg.multiply(x, y);
}

void SchurComplement::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(size()) || y.size() != x.size())
    throw DimensionMismatch("Schur complement operand size");
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> xl, yl, ti, tg;
  for (std::size_t s = 0; s < blocks_.size(); ++s) {
    const auto& L = im_->sub[s];
    const std::size_t ng = L.interface.size(), ni = L.interior.size();
    xl.resize(ng);
    yl.resize(ng);
    tg.resize(ng);
    ti.resize(ni);
    for (std::size_t k = 0; k < ng; ++k) xl[k] = x[L.gamma_index[k]];
    blocks_[s].agg.multiply(xl, yl);
    if (ni > 0) {
      blocks_[s].aig.multiply(xl, ti);
      blocks_[s].fii.solve(ti);
      blocks_[s].aig.multiply_transpose(ti, tg);
      for (std::size_t k = 0; k < ng; ++k) yl[k] -= tg[k];
    }
    for (std::size_t k = 0; k < ng; ++k) y[L.gamma_index[k]] += yl[k];
  }
}

std::vector<double> SchurComplement::reduced_rhs() const {
  std::vector<double> g(static_cast<std::size_t>(size()), 0.0);
  std::vector<double> fi, tg;
  for (std::size_t s = 0; s < blocks_.size(); ++s) {
    const auto& L = im_->sub[s];
    const auto& f = systems_[s].f;
    fi.resize(L.interior.size());
    tg.resize(L.interface.size());
    for (std::size_t k = 0; k < L.interior.size(); ++k) fi[k] = f[L.interior[k]];
    std::fill(tg.begin(), tg.end(), 0.0);
    if (!fi.empty()) {
      blocks_[s].fii.solve(fi);
      blocks_[s].aig.multiply_transpose(fi, tg);
    }
    for (std::size_t k = 0; k < L.interface.size(); ++k) g[L.gamma_index[k]] += f[L.interface[k]] - tg[k];
  }
  return g;
}

std::vector<double> SchurComplement::recover(std::span<const double> ug, const GlobalDofs& dofs) const {
  std::vector<double> u = dofs.values;
  for (std::size_t k = 0; k < im_->gamma_dofs.size(); ++k) u[static_cast<std::size_t>(im_->gamma_dofs[k])] = ug[k];
  std::vector<double> xl, ti;
  for (std::size_t s = 0; s < blocks_.size(); ++s) {
    const auto& L = im_->sub[s];
    const auto& S = systems_[s];
    if (L.interior.empty()) continue;
    xl.resize(L.interface.size());
    ti.resize(L.interior.size());
    for (std::size_t k = 0; k < L.interface.size(); ++k) xl[k] = ug[L.gamma_index[k]];
    blocks_[s].aig.multiply(xl, ti);
    for (std::size_t k = 0; k < L.interior.size(); ++k) ti[k] = S.f[L.interior[k]] - ti[k];
    blocks_[s].fii.solve(ti);
    for (std::size_t k = 0; k < L.interior.size(); ++k)
      u[static_cast<std::size_t>(S.global_dofs[L.interior[k]])] = ti[k];
  }
  return u;
}

}  // namespace amrbddc
