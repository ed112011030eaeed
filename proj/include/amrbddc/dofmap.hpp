#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "amrbddc/forest.hpp"

namespace amrbddc {

// Geometric identity of a tensor node: per-axis either a fixed lattice coordinate or a free
// axis spanning [start, start + size) with an interior GLL index.
struct NodeKey {
  std::array<std::int64_t, 3> coord{0, 0, 0};
  std::int64_t size{0};
  std::uint8_t free_mask{0};
  std::array<std::uint8_t, 3> index{0, 0, 0};
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

// Row of a transition matrix for a constrained local node: weights over local slots.
struct ConstraintRow {
  int local{0};
  std::vector<std::pair<int, double>> weights;
};

class DofMap {
 public:
  int dim{3};
  int order{1};
  int nodes_per_element{8};
  std::size_t num_elements{0};
  // element e, slot i -> global node
  std::vector<std::int64_t> element_nodes;
  std::vector<std::size_t> constraint_offsets;  // num_elements + 1
  std::vector<ConstraintRow> constraints;
  std::vector<NodeKey> node_keys;
  std::vector<std::array<double, 3>> node_coords;
  std::vector<std::uint8_t> node_on_boundary;

  [[nodiscard]] std::size_t num_nodes() const { return node_keys.size(); }
  [[nodiscard]] std::span<const std::int64_t> element(std::size_t e) const {
    return {element_nodes.data() + e * static_cast<std::size_t>(nodes_per_element),
            static_cast<std::size_t>(nodes_per_element)};
  }
  [[nodiscard]] std::span<const ConstraintRow> element_constraints(std::size_t e) const {
    return {constraints.data() + constraint_offsets[e], constraint_offsets[e + 1] - constraint_offsets[e]};
  }
  [[nodiscard]] bool is_constrained(std::size_t e) const {
    return constraint_offsets[e + 1] > constraint_offsets[e];
  }
  [[nodiscard]] std::size_t num_constrained_elements() const;
};

// Tensor index of local node i, x fastest.
[[nodiscard]] std::array<int, 3> local_index(int i, int order, int dim);

[[nodiscard]] DofMap enumerate_dofs(const Forest& f, int order);
// Square transition matrix of element e (identity without hanging nodes).
[[nodiscard]] Eigen::MatrixXd build_transition(const DofMap& dm, std::size_t e);

void write_dofmap(std::ostream& os, const DofMap& dm);

}  // namespace amrbddc
