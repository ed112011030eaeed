#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "amrbddc/basis.hpp"
#include "amrbddc/dofmap.hpp"
#include "amrbddc/error.hpp"

namespace {

using namespace amrbddc;

Forest hanging_forest(int dim, int base, int extra) {
  Forest f = Forest::uniform(dim, base);
  for (int k = 0; k < extra; ++k) {
    std::vector<char> mark(f.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto x = f.physical_corner(f.leaf(i));
      const double h = f.physical_size(f.leaf(i).level);
      bool inside = true;
      for (int a = 0; a < dim; ++a) inside = inside && x[a] <= 0.3 && 0.3 <= x[a] + h;
      mark[i] = inside ? 1 : 0;
    }
    f = balance_2to1(refine(f, mark));
  }
  return f;
}

std::array<double, 3> local_node_position(const Forest& f, std::size_t e, int i, int p, const std::vector<double>& xi) {
  const auto t = local_index(i, p, f.dim());
  const auto x0 = f.physical_corner(f.leaf(e));
  const double h = f.physical_size(f.leaf(e).level);
  std::array<double, 3> x{0, 0, 0};
  for (int a = 0; a < f.dim(); ++a) x[a] = x0[a] + h * xi[static_cast<std::size_t>(t[a])];
  return x;
}

TEST(DofMap, UniformCounts) {
  EXPECT_EQ(enumerate_dofs(Forest::uniform(3, 2), 1).num_nodes(), 125u);
  EXPECT_EQ(enumerate_dofs(Forest::uniform(2, 2), 2).num_nodes(), 81u);
  EXPECT_EQ(enumerate_dofs(Forest::uniform(3, 1), 4).num_nodes(), 729u);
  EXPECT_EQ(enumerate_dofs(Forest::uniform(2, 1), 3).num_nodes(), 49u);
  const DofMap dm = enumerate_dofs(Forest::uniform(3, 1, 3), 1);
  EXPECT_EQ(dm.num_nodes(), 343u);
  EXPECT_EQ(dm.num_constrained_elements(), 0u);
}

TEST(DofMap, SingleRefinedQuadrantHasHangingNodes) {
  Forest f = Forest::uniform(2, 1);
  const std::size_t m[1] = {0};
  f = refine(f, m);
  const DofMap dm = enumerate_dofs(f, 1);
  EXPECT_EQ(dm.num_nodes(), 12u);
  EXPECT_EQ(dm.num_constrained_elements(), 3u);
  int boundary = 0;
  for (auto b : dm.node_on_boundary) boundary += b;
  EXPECT_EQ(boundary, 10);
}

TEST(DofMap, RejectsUnsupportedOrders) {
  EXPECT_THROW((void)enumerate_dofs(Forest::uniform(3, 1), 3), InvalidArgument);
  EXPECT_THROW((void)enumerate_dofs(Forest::uniform(2, 1), 5), InvalidArgument);
}

TEST(DofMap, RejectsUnbalancedForest) {
  Forest f = Forest::uniform(2, 1);
  for (int k = 0; k < 2; ++k) {
    const std::size_t m[1] = {0};
    f = refine(f, m);
  }
  // leaf 3 of the deepest refinement touches a level-1 leaf
  const std::size_t m2[1] = {3};
  f = refine(f, m2);
  ASSERT_FALSE(is_balanced(f));
  EXPECT_THROW((void)enumerate_dofs(f, 1), UnbalancedForestError);
}

class DofMapProperty : public ::testing::TestWithParam<std::tuple<int, int>> {};

// The constrained local expansion T * u(global) reproduces any global polynomial of degree p.
TEST_P(DofMapProperty, TransitionReproducesPolynomials) {
  const auto [dim, p] = GetParam();
  const Forest f = hanging_forest(dim, dim == 2 ? 2 : 1, 2);
  const DofMap dm = enumerate_dofs(f, p);
  ASSERT_GT(dm.num_constrained_elements(), 0u);
  const auto xi = basis::lobatto_points(p);
  // total-degree-p polynomial (x y has degree 2; use only for p >= 2)
  auto q = [p](const std::array<double, 3>& x) {
    const double base = std::pow(1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2], p);
    return p >= 2 ? base + x[0] * x[1] : base;
  };
  std::vector<double> g(dm.num_nodes());
  for (std::size_t n = 0; n < dm.num_nodes(); ++n) g[n] = q(dm.node_coords[n]);
  double err = 0.0;
  for (std::size_t e = 0; e < dm.num_elements; ++e) {
    const Eigen::MatrixXd T = build_transition(dm, e);
    EXPECT_EQ(T.isIdentity(0.0), !dm.is_constrained(e));
    Eigen::VectorXd ug(dm.nodes_per_element);
    for (int i = 0; i < dm.nodes_per_element; ++i) ug(i) = g[static_cast<std::size_t>(dm.element(e)[i])];
    const Eigen::VectorXd ul = T * ug;
    for (int i = 0; i < dm.nodes_per_element; ++i) {
      err = std::max(err, std::abs(ul(i) - q(local_node_position(f, e, i, p, xi))));
    }
    for (int r = 0; r < T.rows(); ++r) EXPECT_NEAR(T.row(r).sum(), 1.0, 1e-13);
  }
  EXPECT_LT(err, 1e-11);
}

INSTANTIATE_TEST_SUITE_P(Orders, DofMapProperty,
                         ::testing::Values(std::tuple{2, 1}, std::tuple{2, 2}, std::tuple{2, 3}, std::tuple{2, 4},
                                           std::tuple{3, 1}, std::tuple{3, 2}, std::tuple{3, 4}));

TEST(DofMap, NodesAreGeometricallyDistinct) {
  const Forest f = hanging_forest(3, 1, 2);
  const DofMap dm = enumerate_dofs(f, 2);
  std::set<std::array<double, 3>> seen(dm.node_coords.begin(), dm.node_coords.end());
  EXPECT_EQ(seen.size(), dm.num_nodes());
  for (std::size_t n = 0; n < dm.num_nodes(); ++n) {
    bool bnd = false;
    for (int a = 0; a < 3; ++a) bnd = bnd || dm.node_coords[n][a] == 0.0 || dm.node_coords[n][a] == 1.0;
    EXPECT_EQ(bnd, dm.node_on_boundary[n] != 0);
  }
}

TEST(DofMap, HangingEdgeWithoutHangingFaceIn3D) {
  // refine one octant of a level-1 cube: the diagonal octants see only a hanging edge
  Forest f = Forest::uniform(3, 1);
  const std::size_t m[1] = {0};
  f = refine(f, m);
  const DofMap dm = enumerate_dofs(f, 1);
  // 27 coarse nodes + new nodes of the refined octant that are not hanging: only its center
  // node and the three face centers on the domain boundary and three edge midpoints on it
  EXPECT_EQ(dm.num_nodes(), 27u + 1u + 3u + 3u);
}

TEST(DofMap, DumpIsDeterministic) {
  const Forest f = hanging_forest(2, 2, 1);
  std::stringstream a, b;
  write_dofmap(a, enumerate_dofs(f, 2));
  write_dofmap(b, enumerate_dofs(f, 2));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("row"), std::string::npos);
}

}  // namespace
