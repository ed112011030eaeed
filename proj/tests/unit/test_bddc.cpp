#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>
#include <sstream>

#include "amrbddc/bddc.hpp"
#include "amrbddc/error.hpp"
#include "amrbddc/krylov.hpp"

namespace {

using namespace amrbddc;

double dot_(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Setup {
  Forest f;
  DofMap dm;
  Partition part;
  std::vector<SubdomainSystem> sys;
  InterfaceMap im;
};

std::unique_ptr<Setup> make(Forest f, int p, const Partition& part, const Problem& pb, bool per_component = true) {
  auto s = std::make_unique<Setup>(Setup{std::move(f), {}, part, {}, {}});
  s->dm = enumerate_dofs(s->f, p);
  const Assembler a(s->f, s->dm, pb);
  s->sys = a.subassemble_all(part, per_component ? detect_components(s->f, part, AdjacencyRule::Face) : single_components(part));
  s->im = classify_interface(std::span<const SubdomainSystem>(s->sys));
  return s;
}

std::unique_ptr<Setup> make(Forest f, int p, int ns, const Problem& pb) {
  const auto part = partition_equal(f.size(), ns);
  return make(std::move(f), p, part, pb);
}

Eigen::MatrixXd dense_operator(int n, const std::function<void(std::span<const double>, std::span<double>)>& op) {
  Eigen::MatrixXd M(n, n);
  std::vector<double> e(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    op(e, y);
    for (int i = 0; i < n; ++i) M(i, j) = y[static_cast<std::size_t>(i)];
  }
  return M;
}

TEST(Globs, RegularTwoByTwoByTwo) {
  const auto s = make(Forest::uniform(3, 2, 2), 1, 8, Problem::poisson_const(3));
  const auto globs = classify_globs(s->sys, s->im);
  int faces = 0, edges = 0, vertices = 0;
  for (const auto& g : globs) {
    faces += g.kind == GlobKind::Face;
    edges += g.kind == GlobKind::Edge;
    vertices += g.kind == GlobKind::Vertex;
  }
  EXPECT_EQ(faces, 12);
  EXPECT_EQ(edges, 6);
  EXPECT_EQ(vertices, 1);
  std::vector<int> seen(static_cast<std::size_t>(s->im.size()), 0);
  for (const auto& g : globs)
    for (int k : g.gamma) ++seen[static_cast<std::size_t>(k)];
  for (int c : seen) EXPECT_EQ(c, 1);
}

// Lattice count for k^3 regular subdomains: 3k^2(k-1) faces, 3k(k-1)^2 edges, (k-1)^3 vertices.
TEST(Globs, RegularFourCubedMatchesLattice) {
  const auto s = make(Forest::uniform(3, 2, 4), 1, 64, Problem::poisson_const(3));
  const Bddc M(s->sys, s->im, BddcOptions{});
  EXPECT_EQ(M.coarse_size(), 3 * 16 * 3 + 3 * 4 * 9 + 27);
  const auto fe = M.local_coarse_counts(true);
  EXPECT_EQ(*std::min_element(fe.begin(), fe.end()), 6);
  EXPECT_EQ(*std::max_element(fe.begin(), fe.end()), 18);
}

TEST(Globs, ElasticityFieldsSeparate) {
  const auto s = make(Forest::uniform(2, 2, 2), 1, 4, Problem::elasticity(2));
  for (const auto& g : classify_globs(s->sys, s->im))
    for (int k : g.gamma) EXPECT_EQ(s->im.gamma_dofs[static_cast<std::size_t>(k)] % 2, g.field);
}

// Coarse basis against a dense constrained-minimisation (KKT) solve.
TEST(CoarseBasis, MatchesDenseKkt) {
  const Problem pb = Problem::poisson_const(2);
  const auto s = make(apply_pattern(Forest::uniform(2, 3), Pattern::Box), 2, 5, pb);
  const Bddc M(s->sys, s->im, BddcOptions{});
  for (int i = 0; i < static_cast<int>(s->sys.size()); ++i) {
    const auto& S = s->sys[static_cast<std::size_t>(i)];
    const auto& rows = M.constraints(i);
    const int n = S.size(), m = static_cast<int>(rows.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = S.A.to_dense();
    for (int r = 0; r < m; ++r)
      for (const auto& [l, w] : rows[static_cast<std::size_t>(r)].entries) K(n + r, l) = K(l, n + r) = w;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + m, m);
    rhs.bottomRows(m).setIdentity();
    const Eigen::MatrixXd X = K.fullPivLu().solve(rhs);
    EXPECT_LT((M.phi(i) - X.topRows(n)).norm(), 1e-9 * (1.0 + X.topRows(n).norm())) << i;
    const Eigen::MatrixXd Sc = -X.bottomRows(m);
    EXPECT_LT((M.coarse_matrix(i) - Sc).norm(), 1e-9 * (1.0 + Sc.norm())) << i;
    EXPECT_LT((M.coarse_matrix(i) - M.coarse_matrix(i).transpose()).norm(), 1e-10 * (1.0 + Sc.norm()));
    // unit value on its own coarse dof
    const Eigen::MatrixXd CPhi = K.bottomLeftCorner(m, n) * M.phi(i);
    EXPECT_LT((CPhi - Eigen::MatrixXd::Identity(m, m)).norm(), 1e-10);
  }
}

TEST(CoarseBasis, FloatingPoissonReproducesConstants) {
  const auto s = make(Forest::uniform(3, 1, 3), 1, 27, Problem::poisson_const(3));
  const Bddc M(s->sys, s->im, BddcOptions{});
  const int c = 13;  // the centre subdomain touches no boundary
  ASSERT_FALSE(s->sys[c].component_anchored[0]);
  const Eigen::VectorXd ones = M.phi(c).rowwise().sum();
  EXPECT_LT((ones - Eigen::VectorXd::Ones(ones.size())).norm(), 1e-10);
  EXPECT_LT((M.coarse_matrix(c) * Eigen::VectorXd::Ones(M.coarse_matrix(c).cols())).norm(),
            1e-10 * M.coarse_matrix(c).norm());
}

TEST(CoarseBasis, SingleSubdomainHasEmptyCoarseProblem) {
  const auto s = make(Forest::uniform(2, 3), 1, 1, Problem::poisson_const(2));
  const Bddc M(s->sys, s->im, BddcOptions{});
  EXPECT_EQ(M.coarse_size(), 0);
  EXPECT_EQ(s->im.size(), 0);
}

class Preconditioner : public ::testing::TestWithParam<int> {};

TEST_P(Preconditioner, ZeroSymmetricAndBoundedBelow) {
  const int levels = GetParam();
  const auto s = make(apply_pattern(Forest::uniform(3, 2, 2), Pattern::Sphere), 1, 16, Problem::poisson_const(3));
  BddcOptions o;
  o.levels = levels;
  o.level2_subdomains = 3;
  const Bddc M(s->sys, s->im, o);
  EXPECT_EQ(M.levels(), levels);
  const int n = s->im.size();
  ASSERT_LE(n, 500);
  std::vector<double> z(static_cast<std::size_t>(n), 1.0), r(static_cast<std::size_t>(n), 0.0);
  M.apply(r, z);
  for (double v : z) EXPECT_EQ(v, 0.0);

  std::mt19937 rng(7);
  std::normal_distribution<double> N;
  std::vector<double> a(static_cast<std::size_t>(n)), b(a), ma(a), mb(a);
  for (int t = 0; t < 20; ++t) {
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = N(rng);
      b[static_cast<std::size_t>(i)] = N(rng);
    }
    M.apply(a, ma);
    M.apply(b, mb);
    const double x = dot_(b, ma), y = dot_(a, mb);
    EXPECT_NEAR(x, y, 1e-10 * (std::abs(x) + std::abs(y)));
  }

  const SchurComplement S(s->sys, s->im);
  const Eigen::MatrixXd Sd = dense_operator(n, [&](auto x, auto y) { S.apply(x, y); });
  Eigen::MatrixXd Md = dense_operator(n, [&](auto x, auto y) { M.apply(x, y); });
  Md = (0.5 * (Md + Md.transpose())).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sd, Md.inverse());
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  EXPECT_GE(lmin, 1.0 - 1e-8);

  // PCG within the condition-number bound of the dense spectrum
  const auto g = S.reduced_rhs();
  const auto res = pcg([&](auto x, auto y) { S.apply(x, y); }, [&](auto x, auto y) { M.apply(x, y); }, g);
  ASSERT_TRUE(res.converged);
  const double k = lmax / lmin, rho = (std::sqrt(k) - 1.0) / (std::sqrt(k) + 1.0);
  const int bound = rho > 0 ? static_cast<int>(std::ceil(std::log(1e-6 / (2.0 * std::sqrt(k))) / std::log(rho))) : 1;
  EXPECT_LE(res.iterations, std::max(bound, 1));
}

INSTANTIATE_TEST_SUITE_P(Levels, Preconditioner, ::testing::Values(2, 3));

TEST(Preconditioner, RegularEightSubdomainSpectrum) {
  // 2x2x2 subdomains, H/h=4: the dense spectrum predicts the PCG count
  const auto s = make(Forest::uniform(3, 2, 2), 1, 8, Problem::poisson_const(3));
  const Bddc M(s->sys, s->im, BddcOptions{});
  const SchurComplement S(s->sys, s->im);
  const int n = s->im.size();
  const Eigen::MatrixXd Sd = dense_operator(n, [&](auto x, auto y) { S.apply(x, y); });
  Eigen::MatrixXd Md = dense_operator(n, [&](auto x, auto y) { M.apply(x, y); });
  Md = (0.5 * (Md + Md.transpose())).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sd, Md.inverse());
  EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-8);
  const auto g = S.reduced_rhs();
  // Krylov dimension: number of distinct eigenvalues with a non-negligible component of g
  const Eigen::MatrixXd V = es.eigenvectors();
  const Eigen::VectorXd coef = V.transpose() * Md.inverse() * Eigen::Map<const Eigen::VectorXd>(g.data(), n);
  std::vector<double> active;
  for (Eigen::Index i = 0; i < coef.size(); ++i)
    if (std::abs(coef(i)) > 1e-8 * coef.norm()) active.push_back(es.eigenvalues()(i));
  std::sort(active.begin(), active.end());
  int distinct = 0;
  for (std::size_t i = 0; i < active.size(); ++i) distinct += i == 0 || active[i] - active[i - 1] > 1e-8;
  const auto res = pcg([&](auto x, auto y) { S.apply(x, y); }, [&](auto x, auto y) { M.apply(x, y); }, g);
  EXPECT_LE(res.iterations, distinct);
  EXPECT_EQ(res.iterations, 1);
}

// Two Morton-consecutive interior cells that share no node form subdomain 1.
Partition split_pair_partition(const Forest& f, std::size_t& first) {
  first = f.size();
  auto box = [&](std::size_t i) {
    const auto& c = f.leaf(i);
    const auto x = f.physical_corner(c);
    return std::pair{x, x[0] + f.physical_size(c.level)};
  };
  for (std::size_t i = 0; i + 1 < f.size() && first == f.size(); ++i) {
    const auto [a, ah] = box(i);
    const auto [b, bh] = box(i + 1);
    const double h = ah - a[0];
    bool apart = false, inside = true;
    for (int d = 0; d < 3; ++d) {
      apart = apart || a[d] > b[d] + h + 1e-12 || b[d] > a[d] + h + 1e-12;
      inside = inside && a[d] > 1e-12 && b[d] > 1e-12 && a[d] + h < 1 - 1e-12 && b[d] + h < 1 - 1e-12;
    }
    (void)bh;
    if (apart && inside) first = i;
  }
  std::vector<int> owner(f.size(), 0);
  for (std::size_t i = first; i < f.size(); ++i) owner[i] = i < first + 2 ? 1 : 2;
  return partition_from_owner(owner, 3);
}

TEST(Disconnected, PerComponentConstraintsRestoreSolvability) {
  const Forest f = Forest::uniform(3, 4);
  std::size_t first = 0;
  const Partition part = split_pair_partition(f, first);
  ASSERT_LT(first, f.size());
  const Problem pb = Problem::elasticity(3);
  BddcOptions o;
  o.kernel_dim = 6;
  o.corners = true;

  const auto split = make(f, 1, part, pb, true);
  ASSERT_EQ(split->sys[1].num_components, 2);
  ASSERT_FALSE(split->sys[1].component_anchored[0]);
  ASSERT_FALSE(split->sys[1].component_anchored[1]);
  const Bddc ok(split->sys, split->im, o);
  const auto in = ok.saddle_inertia(1);
  EXPECT_EQ(in.positive, split->sys[1].size());
  EXPECT_EQ(in.negative, static_cast<int>(ok.constraints(1).size()));
  EXPECT_EQ(in.zero, 0);

  const auto merged = make(f, 1, part, pb, false);
  ASSERT_EQ(merged->sys[1].num_components, 1);
  // face and edge averages over both pieces cannot pin twelve rigid modes
  o.corners = false;
  try {
    const Bddc bad(merged->sys, merged->im, o);
    ADD_FAILURE() << "shared constraints should leave the saddle problem singular";
  } catch (const SaddleSingularError& e) {
    EXPECT_EQ(e.subdomain, 1);
  }
}

TEST(Disconnected, TooFewConstraintsReported) {
  const auto s = make(Forest::uniform(3, 1, 3), 1, 27, Problem::poisson_const(3));
  BddcOptions o;
  o.kernel_dim = 1000;
  try {
    const Bddc M(s->sys, s->im, o);
    ADD_FAILURE() << "expected InsufficientConstraintsError";
  } catch (const InsufficientConstraintsError& e) {
    EXPECT_EQ(e.subdomain, 13);
    EXPECT_EQ(e.component, 0);
  }
}

TEST(Diagnostics, DumpsConstraintsBasisAndInertia) {
  const auto s = make(Forest::uniform(2, 2, 2), 1, 4, Problem::poisson_const(2));
  const Bddc M(s->sys, s->im, BddcOptions{});
  std::ostringstream os;
  M.write_diagnostics(os, 0);
  const std::string d = os.str();
  EXPECT_EQ(d.rfind("# subdomain 0", 0), 0u);
  for (const char* key : {"\nconstraints\n", "\nphi ", "\ncoarse_matrix ", "\ninertia "}) EXPECT_NE(d.find(key), std::string::npos);
  std::ostringstream os2;
  M.write_local_properties(os2);
  const std::string lp = os2.str();
  EXPECT_EQ(lp.rfind("subdomain,n_dofs,n_components,n_coarse,factor_time,solve_time\n", 0), 0u);
  EXPECT_EQ(std::count(lp.begin(), lp.end(), '\n'), 5);
}

TEST(Multilevel, ThreeLevelLayout) {
  const auto s = make(Forest::uniform(3, 1, 4), 1, 64, Problem::poisson_const(3));
  BddcOptions o;
  o.levels = 3;
  o.level2_subdomains = 8;
  const Bddc M(s->sys, s->im, o);
  EXPECT_EQ(M.levels(), 3);
  EXPECT_EQ(M.coarse_size(), 279);
}

}  // namespace
