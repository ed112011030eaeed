#include "amrbddc/forest.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "amrbddc/error.hpp"

namespace amrbddc {

int max_level_for_dim(int dim) {
  if (dim == 2) return 29;
  if (dim == 3) return 19;
  throw InvalidArgument("dimension must be 2 or 3");
}

std::uint64_t morton_encode(const std::array<std::uint32_t, 3>& c, int dim) {
  std::uint64_t m = 0;
  for (int b = 0; b < (dim == 2 ? 32 : 21); ++b)
    for (int a = 0; a < dim; ++a)
      m |= static_cast<std::uint64_t>((c[a] >> b) & 1u) << (dim * b + a);
  return m;
}

std::array<std::uint32_t, 3> morton_decode(std::uint64_t m, int dim) {
  std::array<std::uint32_t, 3> c{0, 0, 0};
  for (int b = 0; b < (dim == 2 ? 32 : 21); ++b)
    for (int a = 0; a < dim; ++a)
      c[a] |= static_cast<std::uint32_t>((m >> (dim * b + a)) & 1u) << b;
  return c;
}

Forest::Forest(int dim, int trees_per_axis)
    : dim_(dim), max_level_(max_level_for_dim(dim)), trees_per_axis_(trees_per_axis) {
  if (trees_per_axis < 1) throw InvalidArgument("trees_per_axis must be positive");
  leaves_.resize(static_cast<std::size_t>(num_trees()));
  for (int t = 0; t < num_trees(); ++t) leaves_[t] = CellKey{t, 0, 0};
}

Forest::Forest(int dim, int trees_per_axis, std::vector<CellKey> leaves)
    : dim_(dim), max_level_(max_level_for_dim(dim)), trees_per_axis_(trees_per_axis),
      leaves_(std::move(leaves)) {}

Forest Forest::uniform(int dim, int level, int trees_per_axis) {
  Forest f(dim, trees_per_axis);
  if (level > f.max_level_) throw LevelCapError(0, level, 0);
  const std::uint64_t per_tree = std::uint64_t{1} << (dim * level);
  std::vector<CellKey> leaves;
  leaves.reserve(per_tree * static_cast<std::uint64_t>(f.num_trees()));
  for (int t = 0; t < f.num_trees(); ++t)
    for (std::uint64_t m = 0; m < per_tree; ++m) leaves.push_back(CellKey{t, level, m});
  f.leaves_ = std::move(leaves);
  return f;
}

int Forest::num_trees() const {
  int n = 1;
  for (int a = 0; a < dim_; ++a) n *= trees_per_axis_;
  return n;
}

std::int64_t Forest::lattice_extent() const {
  return static_cast<std::int64_t>(trees_per_axis_) << max_level_;
}

std::int64_t Forest::cell_lattice_size(int level) const {
  return std::int64_t{1} << (max_level_ - level);
}

Lattice Forest::global_cell_coords(const CellKey& c) const {
  const auto loc = morton_decode(c.morton, dim_);
  Lattice g{0, 0, 0};
  int t = c.tree;
  for (int a = 0; a < dim_; ++a) {
    const std::int64_t tc = t % trees_per_axis_;
    t /= trees_per_axis_;
    g[a] = (tc << c.level) + loc[a];
  }
  return g;
}

Lattice Forest::lattice_corner(const CellKey& c) const {
  Lattice g = global_cell_coords(c);
  for (int a = 0; a < dim_; ++a) g[a] <<= (max_level_ - c.level);
  return g;
}

std::optional<CellKey> Forest::cell_from_global(int level, const Lattice& g) const {
  const std::int64_t n = static_cast<std::int64_t>(trees_per_axis_) << level;
  std::array<std::uint32_t, 3> loc{0, 0, 0};
  int tree = 0;
  int stride = 1;
  for (int a = 0; a < dim_; ++a) {
    if (g[a] < 0 || g[a] >= n) return std::nullopt;
    tree += static_cast<int>(g[a] >> level) * stride;
    stride *= trees_per_axis_;
    loc[a] = static_cast<std::uint32_t>(g[a] & ((std::int64_t{1} << level) - 1));
  }
  return CellKey{tree, level, morton_encode(loc, dim_)};
}

double Forest::physical_size(int level) const {
  return static_cast<double>(cell_lattice_size(level)) / static_cast<double>(lattice_extent());
}

std::array<double, 3> Forest::physical_corner(const CellKey& c) const {
  const Lattice l = lattice_corner(c);
  const double ext = static_cast<double>(lattice_extent());
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(l[a]) / ext;
  return x;
}

CellKey Forest::parent(const CellKey& c, int dim) {
  return CellKey{c.tree, c.level - 1, c.morton >> dim};
}

CellKey Forest::child(const CellKey& c, int dim, int which) {
  return CellKey{c.tree, c.level + 1, (c.morton << dim) | static_cast<std::uint64_t>(which)};
}

int Forest::child_id(const CellKey& c, int dim) {
  return static_cast<int>(c.morton & ((std::uint64_t{1} << dim) - 1));
}

bool Forest::less(const CellKey& a, const CellKey& b) const {
  if (a.tree != b.tree) return a.tree < b.tree;
  const std::uint64_t aa = a.morton << (dim_ * (max_level_ - a.level));
  const std::uint64_t ab = b.morton << (dim_ * (max_level_ - b.level));
  if (aa != ab) return aa < ab;
  return a.level < b.level;
}

namespace {
bool contains(const CellKey& outer, const CellKey& inner, int dim) {
  return outer.tree == inner.tree && outer.level <= inner.level &&
         (inner.morton >> (dim * (inner.level - outer.level))) == outer.morton;
}
}  // namespace

std::optional<std::size_t> Forest::find_leaf_containing(const CellKey& c) const {
  auto it = std::upper_bound(leaves_.begin(), leaves_.end(), c,
                             [this](const CellKey& a, const CellKey& b) { return less(a, b); });
  if (it == leaves_.begin()) return std::nullopt;
  --it;
  if (contains(*it, c, dim_)) return static_cast<std::size_t>(it - leaves_.begin());
  return std::nullopt;
}

std::optional<CellKey> Forest::neighbor(const CellKey& c, const std::array<int, 3>& o) const {
  Lattice g = global_cell_coords(c);
  for (int a = 0; a < dim_; ++a) g[a] += o[a];
  return cell_from_global(c.level, g);
}

void Forest::collect_touching(const CellKey& c, const std::array<int, 3>& o,
                              std::vector<std::size_t>& out) const {
  if (auto l = find_leaf_containing(c)) {
    out.push_back(*l);
    return;
  }
  if (c.level >= max_level_) return;
  for (int ch = 0; ch < (1 << dim_); ++ch) {
    bool ok = true;
    for (int a = 0; a < dim_ && ok; ++a) {
      const int bit = (ch >> a) & 1;
      if (o[a] > 0 && bit != 0) ok = false;
      if (o[a] < 0 && bit != 1) ok = false;
    }
    if (ok) collect_touching(child(c, dim_, ch), o, out);
  }
}

std::vector<std::size_t> Forest::touching_leaves(std::size_t i, const std::array<int, 3>& o) const {
  std::vector<std::size_t> out;
  if (auto n = neighbor(leaves_[i], o)) collect_touching(*n, o, out);
  return out;
}

bool Forest::is_valid() const {
  if (leaves_.empty()) return false;
  unsigned __int128 volume = 0;
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const auto& c = leaves_[i];
    if (c.level < 0 || c.level > max_level_ || c.tree < 0 || c.tree >= num_trees()) return false;
    if (c.morton >> (dim_ * c.level) != 0) return false;
    if (i > 0) {
      if (!less(leaves_[i - 1], c)) return false;
      if (contains(leaves_[i - 1], c, dim_)) return false;
    }
    volume += static_cast<unsigned __int128>(1) << (dim_ * (max_level_ - c.level));
  }
  const unsigned __int128 full = (static_cast<unsigned __int128>(1) << (dim_ * max_level_)) *
                                 static_cast<unsigned __int128>(num_trees());
  return volume == full;
}

std::vector<std::array<int, 3>> neighbor_offsets(int dim, bool with_edges, bool with_corners) {
  std::vector<std::array<int, 3>> out;
  const int zr = dim == 3 ? 1 : 0;
  for (int z = -zr; z <= zr; ++z)
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x) {
        const int nz = (x != 0) + (y != 0) + (z != 0);
        if (nz == 0) continue;
        if (nz == 1 || with_corners || (nz == 2 && with_edges && dim == 3))
          out.push_back({x, y, z});
      }
  return out;
}

Forest refine(const Forest& f, const std::vector<char>& mark) {
  const int d = f.dim();
  std::vector<CellKey> out;
  std::size_t extra = 0;
  for (char m : mark) extra += m ? 1 : 0;
  out.reserve(f.size() + extra * ((std::size_t{1} << d) - 1));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const CellKey& c = f.leaf(i);
    if (!mark[i]) {
      out.push_back(c);
      continue;
    }
    if (c.level >= f.max_level()) throw LevelCapError(c.tree, c.level, c.morton);
    for (int ch = 0; ch < (1 << d); ++ch) out.push_back(Forest::child(c, d, ch));
  }
  return Forest(d, f.trees_per_axis(), std::move(out));
}

Forest refine(const Forest& f, std::span<const std::size_t> marked) {
  std::vector<char> mark(f.size(), 0);
  for (std::size_t i : marked) {
    if (i >= f.size()) throw InvalidArgument("marked leaf index out of range");
    mark[i] = 1;
  }
  return refine(f, mark);
}

namespace {
// Marks coarse leaves that violate 2:1 balance; returns the number marked.
std::size_t mark_violations(const Forest& f, std::vector<char>& mark) {
  const auto offs = neighbor_offsets(f.dim(), true, false);
  mark.assign(f.size(), 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const CellKey& c = f.leaf(i);
    if (c.level < 2) continue;
    for (const auto& o : offs) {
      const auto n = f.neighbor(c, o);
      if (!n) continue;
      const auto l = f.find_leaf_containing(*n);
      if (l && f.leaf(*l).level <= c.level - 2 && !mark[*l]) {
        mark[*l] = 1;
        ++count;
      }
    }
  }
  return count;
}
}  // namespace

Forest balance_2to1(const Forest& f) {
  Forest cur = f;
  std::vector<char> mark;
  while (mark_violations(cur, mark) > 0) cur = refine(cur, mark);
  return cur;
}

bool is_balanced(const Forest& f) {
  std::vector<char> mark;
  return mark_violations(f, mark) == 0;
}

bool pattern_marks(const Forest& f, const CellKey& c, Pattern p) {
  const auto lo = f.physical_corner(c);
  const double h = f.physical_size(c.level);
  switch (p) {
    case Pattern::Uniform:
      return true;
    case Pattern::Sphere: {
      constexpr double radius = 0.85;
      double dmin = 0.0, dmax = 0.0;
      for (int a = 0; a < f.dim(); ++a) {
        const double l = lo[a], u = lo[a] + h;
        const double near = std::clamp(0.0, l, u);
        const double far = std::max(std::abs(l), std::abs(u));
        dmin += near * near;
        dmax += far * far;
      }
      return dmin <= radius * radius && radius * radius <= dmax;
    }
    case Pattern::Box: {
      constexpr double blo = 0.26, bhi = 0.28;
      for (int a = 0; a < f.dim(); ++a)
        if (lo[a] > bhi || lo[a] + h < blo) return false;
      return true;
    }
  }
  return false;
}

Forest apply_pattern(const Forest& f, Pattern p) {
  std::vector<char> mark(f.size(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) mark[i] = pattern_marks(f, f.leaf(i), p) ? 1 : 0;
  return balance_2to1(refine(f, mark));
}

Partition partition_equal(std::size_t n_leaves, int n_parts) {
  if (n_parts < 1 || static_cast<std::size_t>(n_parts) > n_leaves)
    throw InvalidArgument("number of subdomains must be in [1, number of leaves]");
  Partition p;
  p.num_subdomains = n_parts;
  p.offsets.resize(static_cast<std::size_t>(n_parts) + 1, 0);
  const std::size_t base = n_leaves / static_cast<std::size_t>(n_parts);
  const std::size_t rem = n_leaves % static_cast<std::size_t>(n_parts);
  for (std::size_t s = 0; s < static_cast<std::size_t>(n_parts); ++s)
    p.offsets[s + 1] = p.offsets[s] + base + (s < rem ? 1 : 0);
  p.owner.resize(n_leaves);
  for (int s = 0; s < n_parts; ++s)
    for (std::size_t i = p.begin(s); i < p.end(s); ++i) p.owner[i] = s;
  return p;
}

Partition partition_from_owner(std::vector<int> owner, int n_parts) {
  Partition p;
  p.num_subdomains = n_parts;
  p.offsets.assign(static_cast<std::size_t>(n_parts) + 1, 0);
  for (std::size_t i = 0; i < owner.size(); ++i) {
    const int s = owner[i];
    if (s < 0 || s >= n_parts) throw InvalidArgument("owner out of range");
    if (i > 0 && s < owner[i - 1]) throw InvalidArgument("partition must be contiguous in leaf order");
    p.offsets[static_cast<std::size_t>(s) + 1]++;
  }
  for (int s = 0; s < n_parts; ++s) p.offsets[s + 1] += p.offsets[s];
  p.owner = std::move(owner);
  return p;
}

namespace {
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};
}  // namespace

ComponentLabeling detect_components(const Forest& f, const Partition& p, AdjacencyRule rule) {
  if (p.owner.size() != f.size()) throw DimensionMismatch("partition does not match forest");
  const auto offs = rule == AdjacencyRule::Face ? neighbor_offsets(f.dim(), false, false)
                                                : neighbor_offsets(f.dim(), true, true);
  UnionFind uf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (const auto& o : offs)
      for (std::size_t j : f.touching_leaves(i, o))
        if (p.owner[j] == p.owner[i]) uf.unite(i, j);
  ComponentLabeling lab;
  lab.component.assign(f.size(), -1);
  lab.num_components.assign(static_cast<std::size_t>(p.num_subdomains), 0);
  std::vector<int> root_label(f.size(), -1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::size_t r = uf.find(i);
    if (root_label[r] < 0) root_label[r] = lab.num_components[static_cast<std::size_t>(p.owner[i])]++;
    lab.component[i] = root_label[r];
  }
  return lab;
}

ComponentLabeling single_components(const Partition& p) {
  ComponentLabeling lab;
  lab.component.assign(p.owner.size(), 0);
  lab.num_components.assign(static_cast<std::size_t>(p.num_subdomains), 1);
  return lab;
}

void write_forest(std::ostream& os, const Forest& f) {
  os << f.dim() << ' ' << f.max_level() << ' ' << f.size();
  if (f.trees_per_axis() != 1) os << ' ' << f.trees_per_axis();
  os << '\n';
  for (const auto& c : f.leaves()) os << c.tree << ' ' << c.level << ' ' << c.morton << '\n';
}

Forest read_forest(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw InvalidArgument("empty forest file");
  std::istringstream hs(header);
  int dim = 0, maxl = 0, k = 1;
  std::size_t n = 0;
  if (!(hs >> dim >> maxl >> n)) throw InvalidArgument("malformed forest header");
  if (!(hs >> k)) k = 1;
  if (maxl != max_level_for_dim(dim)) throw InvalidArgument("unexpected maximum level in forest file");
  std::vector<CellKey> leaves(n);
  for (auto& c : leaves)
    if (!(is >> c.tree >> c.level >> c.morton)) throw InvalidArgument("truncated forest file");
  Forest f(dim, k, std::move(leaves));
  if (!f.is_valid()) throw InvalidArgument("forest file does not describe a valid forest");
  return f;
}

void write_partition(std::ostream& os, const Partition& p) {
  for (std::size_t i = 0; i < p.owner.size(); ++i) os << i << ' ' << p.owner[i] << '\n';
}

Partition read_partition(std::istream& is) {
  std::vector<int> owner;
  std::size_t idx = 0;
  int s = 0;
  int n_parts = 0;
  while (is >> idx >> s) {
    if (idx != owner.size()) throw InvalidArgument("partition file must list leaves in order");
    owner.push_back(s);
    n_parts = std::max(n_parts, s + 1);
  }
  return partition_from_owner(std::move(owner), n_parts);
}

}  // namespace amrbddc
