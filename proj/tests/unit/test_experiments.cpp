#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "amrbddc/error.hpp"
#include "amrbddc/experiments.hpp"

namespace {

using namespace amrbddc;

TEST(Problems, Defaults) {
  const Problem a = Problem::arctan(3);
  EXPECT_DOUBLE_EQ(a.sharpness, 60.0);
  EXPECT_DOUBLE_EQ(a.radius, std::numbers::pi / 3);
  EXPECT_EQ(a.center, (std::array<double, 3>{1.25, -0.25, -0.25}));
  EXPECT_EQ(Problem::arctan(2).center[2], 0.0);
  const Problem e = Problem::elasticity(3);
  EXPECT_DOUBLE_EQ(e.young, 1e10);
  EXPECT_DOUBLE_EQ(e.poisson, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(e.lame_mu(), 1e10 / (2 * (1 + 1.0 / 3.0)));
  EXPECT_EQ(e.kernel_dim(), 6);
  EXPECT_EQ(Problem::elasticity(2).kernel_dim(), 3);
  EXPECT_EQ(Problem::poisson_const(3).kernel_dim(), 1);
  EXPECT_EQ(e.components(), 3);
}

TEST(Problems, ArctanSourceIsMinusLaplacian) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  for (int dim : {2, 3}) {
    const Problem p = Problem::arctan(dim);
    for (int t = 0; t < 50; ++t) {
      std::array<double, 3> x{U(rng), U(rng), dim == 3 ? U(rng) : 0.0};
      const double h = 1e-4;
      double lap = 0.0;
      std::array<double, 3> fd{};
      for (int a = 0; a < dim; ++a) {
        auto xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        lap += (p.exact(xp) - 2 * p.exact(x) + p.exact(xm)) / (h * h);
        fd[a] = (p.exact(xp) - p.exact(xm)) / (2 * h);
      }
      const double f = p.source(x);
      EXPECT_NEAR(f, -lap, 1e-4 * (1.0 + std::abs(f))) << dim;
      const auto g = p.exact_gradient(x);
      for (int a = 0; a < dim; ++a) EXPECT_NEAR(g[a], fd[a], 1e-5 * (1.0 + std::abs(g[a])));
      EXPECT_DOUBLE_EQ(p.dirichlet(x, 0), p.exact(x));
    }
  }
}

TEST(Problems, ByName) {
  for (const char* n : {"poisson2d", "poisson3d", "arctan2d", "arctan3d", "elasticity2d", "elasticity3d"}) {
    const Problem p = problem_from_name(n);
    EXPECT_EQ(p.name() + std::to_string(p.dim) + "d", n);
  }
  EXPECT_THROW((void)problem_from_name("heat3d"), ConfigError);
  EXPECT_THROW((void)problem_from_name("poisson4d"), ConfigError);
}

TEST(Config, ParsesSections) {
  std::istringstream is(R"(; comment
[a]
problem = arctan2d
recipe = refined
uniform = 5
circle = 2
square = 1
nsub = 4, 16
order = 2
levels = 3
level2_subdomains = 2
weights = stiffness
tol = 1e-8
max_iterations = 77

[b]
recipe = adaptive
steps = 3
zeta = 0.2
bins = 50
)");
  const auto m = parse_presets(is);
  ASSERT_EQ(m.size(), 2u);
  const auto& a = m.at("a");
  EXPECT_EQ(a.name, "a");
  EXPECT_EQ(a.problem, "arctan2d");
  EXPECT_EQ(a.recipe, Recipe::Refined);
  EXPECT_EQ(a.nsub, (std::vector<int>{4, 16}));
  EXPECT_EQ(a.order, 2);
  EXPECT_EQ(a.levels, 3);
  EXPECT_EQ(a.level2_subdomains, 2);
  EXPECT_EQ(a.weights, WeightKind::Stiffness);
  EXPECT_DOUBLE_EQ(a.tol, 1e-8);
  EXPECT_EQ(a.max_iterations, 77);
  EXPECT_EQ(a.circle, 2);
  const auto& b = m.at("b");
  EXPECT_EQ(b.recipe, Recipe::Adaptive);
  EXPECT_EQ(b.steps, 3);
  EXPECT_DOUBLE_EQ(b.zeta, 0.2);
  EXPECT_EQ(b.bins, 50);
  EXPECT_EQ(b.problem, "poisson3d");
}

TEST(Config, RejectsBadInput) {
  for (const char* bad : {"[x]\nunknown = 1\n", "[x]\nrecipe = magic\n", "[x]\nnsub = 4, z\n", "[x]\norder = 0\n",
                          "[x]\nlevels = 4\n", "[x]\nproblem = heat3d\n", "[x]\nweights = mass\n", "[x\n",
                          "[x]\nzeta = 1.5\n"}) {
    std::istringstream is(bad);
    EXPECT_THROW((void)parse_presets(is), ConfigError) << bad;
  }
  EXPECT_THROW((void)load_presets("/nonexistent/presets.ini"), ConfigError);
}

TEST(Config, ShippedPresetsLoad) {
  const auto m = load_presets(AMRBDDC_PRESETS);
  for (const char* n : {"regular-weak", "regular-hh", "regular-weak-3level", "regular-strong", "prescribed-2d",
                        "prescribed-3d", "order4-3d", "elasticity-3d", "nonuniformity", "adapt-arctan3d",
                        "adapt-arctan2d"})
    EXPECT_TRUE(m.contains(n)) << n;
  EXPECT_EQ(m.at("regular-weak").nsub, (std::vector<int>{8, 27, 64}));
  EXPECT_EQ(m.at("regular-hh").hh, (std::vector<int>{4, 8, 16}));
}

TEST(Table, EmptySubdomainListGivesEmptyTable) {
  ExperimentPreset p;
  p.nsub.clear();
  EXPECT_TRUE(run_preset(p).empty());
}

TEST(Table, CsvHeader) {
  std::ostringstream os;
  write_table_csv(os, {});
  EXPECT_EQ(os.str(),
            "label,N_S,N_S2,n_elements,n,n_per_sub,n_gamma,n_coarse,iterations,converged,t_setup,t_pcg,coarse_min,"
            "coarse_max,coarse_avg,fact_min,fact_max,fact_avg,sol_min,sol_max,sol_avg,error\n");
}

TEST(Table, RegularWeakScalingIsStableAndReproducible) {
  ExperimentPreset p;
  p.name = "weak";
  p.nsub = {8, 27, 64};
  p.hh = {4};
  const auto a = run_preset(p);
  const auto b = run_preset(p);
  ASSERT_EQ(a.size(), 3u);
  int lo = 1 << 30, hi = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].error.empty()) << a[i].error;
    EXPECT_TRUE(a[i].converged);
    EXPECT_EQ(a[i].label, "hh4_ns" + std::to_string(p.nsub[i]));
    EXPECT_EQ(a[i].num_elements, static_cast<std::size_t>(p.nsub[i]) * 64u);
    lo = std::min(lo, a[i].iterations);
    hi = std::max(hi, a[i].iterations);
    EXPECT_EQ(a[i].iterations, b[i].iterations);
    EXPECT_EQ(a[i].pcg.history, b[i].pcg.history);
    EXPECT_EQ(a[i].pcg.x, b[i].pcg.x);
  }
  EXPECT_LE(hi - lo, 3);
}

TEST(Table, InspectorSeesEverySolve) {
  ExperimentPreset p;
  p.problem = "poisson2d";
  p.recipe = Recipe::Refined;
  p.uniform = 3;
  p.circle = 1;
  p.nsub = {2, 4};
  std::vector<std::string> seen;
  const auto rows = run_preset(p, [&](const std::string& label, const SolveContext& c) {
    seen.push_back(label);
    EXPECT_EQ(c.systems.size(), static_cast<std::size_t>(c.partition.num_subdomains));
  });
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(seen, (std::vector<std::string>{"ns2", "ns4"}));
}

TEST(Convergence, UniformRatesMatchPolynomialDegree) {
  AdaptOptions o;
  o.solver.num_subdomains = 16;
  o.solver.pcg.tol = 1e-10;
  const auto p1 = convergence_report(Problem::arctan(2), 1, false, 6, 2, o);
  EXPECT_NEAR(loglog_slope(p1, false), -1.0, 0.05);
  EXPECT_NEAR(loglog_slope(p1, true), -0.5, 0.05);
  const auto p2 = convergence_report(Problem::arctan(2), 2, false, 5, 2, o);
  EXPECT_NEAR(loglog_slope(p2, false), -1.5, 0.1);
  EXPECT_NEAR(loglog_slope(p2, true), -1.0, 0.1);
  std::ostringstream os;
  write_convergence_dat(os, p1);
  const std::string dat = os.str();
  EXPECT_EQ(dat.substr(0, dat.find('\n')), "# n_dofs L2_error H1_error");
  EXPECT_EQ(std::count(dat.begin(), dat.end(), '\n'), 4);
}

TEST(Convergence, AdaptiveHighOrderBeatsUniform) {
  AdaptOptions o;
  o.solver.num_subdomains = 4;
  o.zeta = 0.12;
  const Problem pb = Problem::arctan(2);
  const auto ad = convergence_report(pb, 4, true, 2, 8, o);
  const auto un = convergence_report(pb, 4, false, 2, 3, o);
  ASSERT_EQ(ad.size(), 9u);
  ASSERT_EQ(un.size(), 4u);
  // fewer unknowns and a smaller error than the finest uniform mesh
  EXPECT_LT(ad.back().n_dofs, un.back().n_dofs);
  EXPECT_LT(ad.back().h1, un.back().h1);
  EXPECT_LT(ad.back().l2, un.back().l2);
  EXPECT_LT(loglog_slope(ad, true), loglog_slope(un, true));
}

TEST(Cli, SolveWritesTableAndResiduals) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "amrbddc_cli_test";
  fs::remove_all(dir);
  const fs::path cfg = dir / "p.ini";
  fs::create_directories(dir);
  std::ofstream(cfg) << "[tiny]\nproblem = poisson2d\nrecipe = refined\nuniform = 3\ncircle = 1\nnsub = 4\n";
  const std::string cmd = std::string(AMRBDDC_CLI) + " --config " + cfg.string() + " solve --preset tiny --nsub 2 --out " +
                          (dir / "out").string() + " --dump > " + (dir / "log").string() + " 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream table(dir / "out" / "tiny.csv");
  std::string header, row, extra;
  std::getline(table, header);
  std::getline(table, row);
  EXPECT_FALSE(std::getline(table, extra));
  EXPECT_EQ(header.substr(0, 10), "label,N_S,");
  EXPECT_EQ(row.substr(0, 6), "ns2,2,");
  std::ifstream res(dir / "out" / "tiny_ns2_residual.csv");
  std::getline(res, header);
  EXPECT_EQ(header, "iteration,relative_residual");
  for (const char* f : {"forest.txt", "partition.txt", "dofmap.txt", "local_properties.csv", "subdomain_0.txt",
                        "subdomain_1.txt", "bddc_0.txt", "bddc_1.txt"})
    EXPECT_TRUE(fs::exists(dir / "out" / "ns2" / f)) << f;
  // unknown preset fails
  const std::string bad = std::string(AMRBDDC_CLI) + " --config " + cfg.string() + " solve --preset nope --out " +
                          (dir / "out").string() + " > /dev/null 2>&1";
  EXPECT_NE(std::system(bad.c_str()), 0);
  fs::remove_all(dir);
}

TEST(Cli, AdaptWritesPerStepCsv) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "amrbddc_cli_adapt";
  fs::remove_all(dir);
  const std::string cmd = std::string(AMRBDDC_CLI) + " adapt --problem arctan3d --steps 2 --zeta 0.15 --bins 100 --out " +
                          dir.string() + " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(dir / "adapt.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
  fs::remove_all(dir);
}

}  // namespace
