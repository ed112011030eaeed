#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "amrbddc/error.hpp"
#include "amrbddc/krylov.hpp"

namespace {

using namespace amrbddc;

Eigen::MatrixXd random_spd(int n, double cond, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = N(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::pow(cond, static_cast<double>(i) / (n - 1));
  return Q * d.asDiagonal() * Q.transpose();
}

LinearOperator as_op(const Eigen::MatrixXd& A) {
  return [&A](std::span<const double> x, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
        A * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  };
}

const LinearOperator identity = [](std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), y.begin());
};

std::vector<double> rhs(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (auto& v : g) v = U(rng);
  return g;
}

TEST(Pcg, ZeroRightHandSide) {
  const Eigen::MatrixXd A = random_spd(10, 10, 1);
  const std::vector<double> g(10, 0.0);
  const auto r = pcg(as_op(A), identity, g);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.history, std::vector<double>{1.0});
  for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(Pcg, ExactPreconditionerConvergesInOneStep) {
  const Eigen::MatrixXd A = random_spd(30, 1e4, 2);
  const Eigen::MatrixXd Ainv = A.inverse();
  const auto g = rhs(30, 3);
  const auto r = pcg(as_op(A), as_op(Ainv), g, {1e-10, 50});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Pcg, MatchesDenseSolve) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const int n = 20 + static_cast<int>(seed) * 7;
    const Eigen::MatrixXd A = random_spd(n, 100, seed);
    const auto g = rhs(n, seed + 100);
    const auto r = pcg(as_op(A), identity, g, {1e-12, 1000});
    ASSERT_TRUE(r.converged);
    const Eigen::VectorXd ref = A.llt().solve(Eigen::Map<const Eigen::VectorXd>(g.data(), n));
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.x.data(), n);
    EXPECT_LT((x - ref).norm(), 1e-9 * ref.norm());
    // residual form of the Chebyshev bound, kappa = 100
    const double rho = 9.0 / 11.0;
    EXPECT_LE(r.iterations, static_cast<int>(std::ceil(std::log(1e-12 / (2.0 * 100.0)) / std::log(rho))));
  }
}

TEST(Pcg, ReportedResidualIsTrueResidual) {
  const int n = 60;
  const Eigen::MatrixXd A = random_spd(n, 1e3, 9);
  const Eigen::VectorXd d = A.diagonal();
  const LinearOperator jacobi = [&](std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] / d(i);
  };
  const auto g = rhs(n, 10);
  const double tol = 1e-6;
  const auto r = pcg(as_op(A), jacobi, g, {tol, 500});
  ASSERT_TRUE(r.converged);
  const Eigen::Map<const Eigen::VectorXd> gv(g.data(), n), xv(r.x.data(), n);
  EXPECT_LT((gv - A * xv).norm() / gv.norm(), 2 * tol);
  EXPECT_LE(r.history.back(), tol);
  EXPECT_EQ(static_cast<int>(r.history.size()), r.iterations + 1);
  for (std::size_t k = 0; k + 1 < r.history.size(); ++k) EXPECT_GT(r.history[k], tol);
}

TEST(Pcg, IterationCapLeavesPrefixUnchanged) {
  const int n = 80;
  const Eigen::MatrixXd A = random_spd(n, 1e6, 4);
  const auto g = rhs(n, 5);
  const auto a = pcg(as_op(A), identity, g, {1e-14, 10});
  const auto b = pcg(as_op(A), identity, g, {1e-14, 20});
  EXPECT_FALSE(a.converged);
  EXPECT_EQ(a.iterations, 10);
  ASSERT_EQ(b.iterations, 20);
  for (std::size_t k = 0; k < a.history.size(); ++k) EXPECT_EQ(a.history[k], b.history[k]);
}

TEST(Pcg, IndefiniteOperatorRejected) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(5, 5);
  A(2, 2) = -1.0;
  const std::vector<double> g{0, 0, 1, 0, 0};
  EXPECT_THROW((void)pcg(as_op(A), identity, g), IndefiniteOperatorError);
}

TEST(Pcg, ResidualCsv) {
  PcgResult r;
  r.history = {1.0, 0.5, 0.0625};
  std::ostringstream os;
  write_residual_csv(os, r);
  EXPECT_EQ(os.str(), "iteration,relative_residual\n0,1\n1,0.5\n2,0.0625\n");
}

}  // namespace
