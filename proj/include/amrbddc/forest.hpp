#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace amrbddc {

// A cell of the forest: tree id, level and Morton index of its coordinates at that level.
struct CellKey {
  std::int32_t tree{0};
  std::int32_t level{0};
  std::uint64_t morton{0};

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

using Lattice = std::array<std::int64_t, 3>;

[[nodiscard]] int max_level_for_dim(int dim);
[[nodiscard]] std::uint64_t morton_encode(const std::array<std::uint32_t, 3>& c, int dim);
[[nodiscard]] std::array<std::uint32_t, 3> morton_decode(std::uint64_t m, int dim);

enum class Pattern { Uniform, Sphere, Box };

// Forest of quadtrees (dim 2) or octrees (dim 3). The trees form a k^dim brick covering the
// unit square/cube; each tree spans 2^max_level lattice units per axis. Leaves are kept in
// space-filling-curve order: tree, then Morton anchor, then level.
class Forest {
 public:
  Forest() = default;
  explicit Forest(int dim, int trees_per_axis = 1);
  Forest(int dim, int trees_per_axis, std::vector<CellKey> leaves);

  [[nodiscard]] static Forest uniform(int dim, int level, int trees_per_axis = 1);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int max_level() const { return max_level_; }
  [[nodiscard]] int trees_per_axis() const { return trees_per_axis_; }
  [[nodiscard]] int num_trees() const;
  [[nodiscard]] std::size_t size() const { return leaves_.size(); }
  [[nodiscard]] std::span<const CellKey> leaves() const { return leaves_; }
  [[nodiscard]] const CellKey& leaf(std::size_t i) const { return leaves_[i]; }

  // Lattice extent of the whole domain along one axis.
  [[nodiscard]] std::int64_t lattice_extent() const;
  [[nodiscard]] std::int64_t cell_lattice_size(int level) const;
  [[nodiscard]] Lattice lattice_corner(const CellKey& c) const;
  // Cell coordinates (in units of cells of that level) over the whole brick.
  [[nodiscard]] Lattice global_cell_coords(const CellKey& c) const;
  [[nodiscard]] std::optional<CellKey> cell_from_global(int level, const Lattice& g) const;
  [[nodiscard]] double physical_size(int level) const;
  [[nodiscard]] std::array<double, 3> physical_corner(const CellKey& c) const;

  [[nodiscard]] static CellKey parent(const CellKey& c, int dim);
  [[nodiscard]] static CellKey child(const CellKey& c, int dim, int which);
  [[nodiscard]] static int child_id(const CellKey& c, int dim);

  // Same-level neighbor across offset o in {-1,0,1}^dim; empty outside the domain.
  [[nodiscard]] std::optional<CellKey> neighbor(const CellKey& c, const std::array<int, 3>& o) const;
  // Leaf equal to or containing c; empty when c is subdivided.
  [[nodiscard]] std::optional<std::size_t> find_leaf_containing(const CellKey& c) const;
  // All leaves touching leaf i through offset o (recurses into finer neighbors).
  [[nodiscard]] std::vector<std::size_t> touching_leaves(std::size_t i, const std::array<int, 3>& o) const;

  [[nodiscard]] bool is_valid() const;
  [[nodiscard]] bool less(const CellKey& a, const CellKey& b) const;

 private:
  void collect_touching(const CellKey& c, const std::array<int, 3>& o, std::vector<std::size_t>& out) const;

  int dim_{3};
  int max_level_{19};
  int trees_per_axis_{1};
  std::vector<CellKey> leaves_;
};

// Offsets of face neighbors, plus edge neighbors when with_edges is set (3D only).
[[nodiscard]] std::vector<std::array<int, 3>> neighbor_offsets(int dim, bool with_edges, bool with_corners);

[[nodiscard]] Forest refine(const Forest& f, std::span<const std::size_t> marked);
[[nodiscard]] Forest refine(const Forest& f, const std::vector<char>& mark);
// 2:1 balance across faces (2D) or faces and edges (3D).
[[nodiscard]] Forest balance_2to1(const Forest& f);
[[nodiscard]] bool is_balanced(const Forest& f);
// One refinement pass of the pattern followed by balancing.
[[nodiscard]] Forest apply_pattern(const Forest& f, Pattern p);
[[nodiscard]] bool pattern_marks(const Forest& f, const CellKey& c, Pattern p);

struct Partition {
  int num_subdomains{0};
  std::vector<int> owner;            // per leaf
  std::vector<std::size_t> offsets;  // num_subdomains + 1, contiguous leaf ranges
  [[nodiscard]] std::size_t begin(int s) const { return offsets[static_cast<std::size_t>(s)]; }
  [[nodiscard]] std::size_t end(int s) const { return offsets[static_cast<std::size_t>(s) + 1]; }
};

// Contiguous slices of the leaf order; the first (n mod N) parts get one extra leaf.
[[nodiscard]] Partition partition_equal(std::size_t n_leaves, int n_parts);
[[nodiscard]] Partition partition_from_owner(std::vector<int> owner, int n_parts);

enum class AdjacencyRule { Face, Node };

struct ComponentLabeling {
  std::vector<int> component;        // per leaf, local to its subdomain
  std::vector<int> num_components;   // per subdomain
};

[[nodiscard]] ComponentLabeling detect_components(const Forest& f, const Partition& p, AdjacencyRule rule);
// Every subdomain treated as one component.
[[nodiscard]] ComponentLabeling single_components(const Partition& p);

void write_forest(std::ostream& os, const Forest& f);
[[nodiscard]] Forest read_forest(std::istream& is);
void write_partition(std::ostream& os, const Partition& p);
[[nodiscard]] Partition read_partition(std::istream& is);

}  // namespace amrbddc
