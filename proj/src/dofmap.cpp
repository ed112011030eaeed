#include "amrbddc/dofmap.hpp"

#include <ostream>
#include <unordered_map>

#include "amrbddc/basis.hpp"
#include "amrbddc/error.hpp"

namespace amrbddc {

namespace {

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto c : k.coord) mix(static_cast<std::uint64_t>(c));
    mix(static_cast<std::uint64_t>(k.size));
    mix(k.free_mask | (std::uint64_t{k.index[0]} << 8) | (std::uint64_t{k.index[1]} << 16) |
        (std::uint64_t{k.index[2]} << 24));
    return static_cast<std::size_t>(h);
  }
};

NodeKey make_key(const Lattice& corner, std::int64_t size, const std::array<int, 3>& t, int p, int dim) {
  NodeKey k;
  for (int a = 0; a < dim; ++a) {
    if (t[a] == 0) {
      k.coord[a] = corner[a];
    } else if (t[a] == p) {
      k.coord[a] = corner[a] + size;
    } else {
      k.coord[a] = corner[a];
      k.free_mask |= static_cast<std::uint8_t>(1u << a);
      k.index[a] = static_cast<std::uint8_t>(t[a]);
    }
  }
  if (k.free_mask) k.size = size;
  return k;
}

}  // namespace

std::array<int, 3> local_index(int i, int order, int dim) {
  const int n = order + 1;
  std::array<int, 3> t{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    t[a] = i % n;
    i /= n;
  }
  return t;
}

std::size_t DofMap::num_constrained_elements() const {
  std::size_t c = 0;
  for (std::size_t e = 0; e < num_elements; ++e) c += is_constrained(e) ? 1 : 0;
  return c;
}

DofMap enumerate_dofs(const Forest& f, int order) {
  const int d = f.dim();
  if (order < 1 || order > 4 || (d == 3 && order == 3))
    throw InvalidArgument("unsupported polynomial order");
  const int p = order;
  const auto xi = basis::lobatto_points(p);
  // w1[off][t][m]: coarse 1D basis m at fine node t of child half off
  std::vector<double> w1(static_cast<std::size_t>(2 * (p + 1) * (p + 1)));
  for (int off = 0; off < 2; ++off)
    for (int t = 0; t <= p; ++t) {
      const auto v = basis::lagrange_values(xi, 0.5 * (off + xi[static_cast<std::size_t>(t)]));
      for (int m = 0; m <= p; ++m) w1[static_cast<std::size_t>((off * (p + 1) + t) * (p + 1) + m)] = v[m];
    }
  auto W = [&](int off, int t, int m) { return w1[static_cast<std::size_t>((off * (p + 1) + t) * (p + 1) + m)]; };

  DofMap dm;
  dm.dim = d;
  dm.order = p;
  int npe = 1;
  for (int a = 0; a < d; ++a) npe *= p + 1;
  dm.nodes_per_element = npe;
  dm.num_elements = f.size();
  dm.element_nodes.resize(f.size() * static_cast<std::size_t>(npe));
  dm.constraint_offsets.assign(f.size() + 1, 0);

  std::vector<std::array<int, 3>> tidx(static_cast<std::size_t>(npe));
  for (int i = 0; i < npe; ++i) tidx[static_cast<std::size_t>(i)] = local_index(i, p, d);
  auto slot_of = [&](const std::array<int, 3>& t) {
    int i = 0;
    for (int a = d - 1; a >= 0; --a) i = i * (p + 1) + t[a];
    return i;
  };

  std::unordered_map<NodeKey, std::int64_t, NodeKeyHash> ids;
  ids.reserve(f.size() * static_cast<std::size_t>(npe) / (d == 3 ? 4 : 2) + 16);
  const std::int64_t ext = f.lattice_extent();

  for (std::size_t e = 0; e < f.size(); ++e) {
    const CellKey& K = f.leaf(e);
    const Lattice X = f.lattice_corner(K);
    const std::int64_t H = f.cell_lattice_size(K.level);
    const Lattice g = f.global_cell_coords(K);
    std::array<int, 3> off{0, 0, 0};
    for (int a = 0; a < d; ++a) off[a] = static_cast<int>(g[a] & 1);

    // hanging faces: face_hang[a] = side or -1
    std::array<int, 3> face_hang{-1, -1, -1};
    for (int a = 0; a < d; ++a)
      for (int s = 0; s < 2; ++s) {
        std::array<int, 3> o{0, 0, 0};
        o[a] = s ? 1 : -1;
        const auto n = f.neighbor(K, o);
        if (!n) continue;
        const auto l = f.find_leaf_containing(*n);
        if (!l) continue;
        const int lev = f.leaf(*l).level;
        if (lev <= K.level - 2) throw UnbalancedForestError(e);
        if (lev == K.level - 1 && off[a] == s) face_hang[a] = s;
      }
    // hanging edges (3D): edge_hang[a] = true if the edge along a on the parent edge hangs
    std::array<bool, 3> edge_hang{false, false, false};
    if (d == 3 && K.level > 0) {
      for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        for (int sb = 0; sb < 2; ++sb)
          for (int sc = 0; sc < 2; ++sc) {
            std::array<int, 3> o{0, 0, 0};
            o[b] = sb ? 1 : -1;
            o[c] = sc ? 1 : -1;
            const auto n = f.neighbor(K, o);
            if (!n) continue;
            const auto l = f.find_leaf_containing(*n);
            if (!l) continue;
            const int lev = f.leaf(*l).level;
            if (lev <= K.level - 2) throw UnbalancedForestError(e);
            if (lev == K.level - 1 && off[b] == sb && off[c] == sc && face_hang[b] != sb &&
                face_hang[c] != sc)
              edge_hang[a] = true;
          }
      }
    }
    const bool any = face_hang[0] >= 0 || face_hang[1] >= 0 || face_hang[2] >= 0 || edge_hang[0] ||
                     edge_hang[1] || edge_hang[2];
    Lattice Xp = X;
    if (any)
      for (int a = 0; a < d; ++a) Xp[a] = X[a] - off[a] * H;

    for (int i = 0; i < npe; ++i) {
      const auto& t = tidx[static_cast<std::size_t>(i)];
      int hface = -1;
      for (int a = 0; a < d && hface < 0; ++a)
        if (face_hang[a] >= 0 && t[a] == face_hang[a] * p) hface = a;
      int hedge = -1;
      if (hface < 0 && d == 3)
        for (int a = 0; a < 3 && hedge < 0; ++a) {
          if (!edge_hang[a]) continue;
          const int b = (a + 1) % 3, c = (a + 2) % 3;
          if (t[b] == off[b] * p && t[c] == off[c] * p) hedge = a;
        }
      NodeKey key;
      if (hface >= 0 || hedge >= 0) {
        key = make_key(Xp, 2 * H, t, p, d);
        ConstraintRow row;
        row.local = i;
        if (hface >= 0) {
          // tangential axes
          std::array<int, 2> ax{};
          int na = 0;
          for (int b = 0; b < d; ++b)
            if (b != hface) ax[static_cast<std::size_t>(na++)] = b;
          const int m1n = p + 1, m2n = na == 2 ? p + 1 : 1;
          for (int m2 = 0; m2 < m2n; ++m2)
            for (int m1 = 0; m1 < m1n; ++m1) {
              double w = W(off[ax[0]], t[ax[0]], m1);
              if (na == 2) w *= W(off[ax[1]], t[ax[1]], m2);
              if (w == 0.0) continue;
              std::array<int, 3> tj = t;
              tj[ax[0]] = m1;
              if (na == 2) tj[ax[1]] = m2;
              row.weights.emplace_back(slot_of(tj), w);
            }
        } else {
          for (int m = 0; m <= p; ++m) {
            const double w = W(off[hedge], t[hedge], m);
            if (w == 0.0) continue;
            std::array<int, 3> tj = t;
            tj[hedge] = m;
            row.weights.emplace_back(slot_of(tj), w);
          }
        }
        const bool identity = row.weights.size() == 1 && row.weights[0].first == i && row.weights[0].second == 1.0;
        if (!identity) dm.constraints.push_back(std::move(row));
      } else {
        key = make_key(X, H, t, p, d);
      }
      auto [it, inserted] = ids.try_emplace(key, static_cast<std::int64_t>(dm.node_keys.size()));
      if (inserted) {
        dm.node_keys.push_back(key);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        bool bnd = false;
        for (int a = 0; a < d; ++a) {
          if (key.free_mask & (1u << a)) {
            x[a] = (static_cast<double>(key.coord[a]) +
                    static_cast<double>(key.size) * xi[key.index[a]]) / static_cast<double>(ext);
          } else {
            x[a] = static_cast<double>(key.coord[a]) / static_cast<double>(ext);
            if (key.coord[a] == 0 || key.coord[a] == ext) bnd = true;
          }
        }
        dm.node_coords.push_back(x);
        dm.node_on_boundary.push_back(bnd ? 1 : 0);
      }
      dm.element_nodes[e * static_cast<std::size_t>(npe) + static_cast<std::size_t>(i)] = it->second;
    }
    dm.constraint_offsets[e + 1] = dm.constraints.size();
  }
  return dm;
}

Eigen::MatrixXd build_transition(const DofMap& dm, std::size_t e) {
  const int n = dm.nodes_per_element;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
  for (const auto& row : dm.element_constraints(e)) {
    T.row(row.local).setZero();
    for (const auto& [j, w] : row.weights) T(row.local, j) = w;
  }
  return T;
}

void write_dofmap(std::ostream& os, const DofMap& dm) {
  os << "# dofmap dim " << dm.dim << " order " << dm.order << " elements " << dm.num_elements
     << " nodes " << dm.num_nodes() << '\n';
  const auto prec = os.precision(17);
  for (std::size_t e = 0; e < dm.num_elements; ++e) {
    os << "element " << e;
    for (auto g : dm.element(e)) os << ' ' << g;
    os << '\n';
    for (const auto& row : dm.element_constraints(e)) {
      os << "  row " << row.local;
      for (const auto& [j, w] : row.weights) os << ' ' << j << ':' << w;
      os << '\n';
    }
  }
  os.precision(prec);
}

}  // namespace amrbddc
