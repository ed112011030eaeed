#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "amrbddc/adaptivity.hpp"
#include "amrbddc/assembly.hpp"
#include "amrbddc/error.hpp"
#include "amrbddc/experiments.hpp"
#include "amrbddc/linalg/sparse.hpp"

namespace fs = std::filesystem;
using namespace amrbddc;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

// Writes every text dump of one solve into dir.
void dump_solve(const fs::path& dir, const SolveContext& c) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "forest.txt");
    write_forest(os, c.forest);
  }
  {
    auto os = open_out(dir / "partition.txt");
    write_partition(os, c.partition);
  }
  {
    auto os = open_out(dir / "dofmap.txt");
    write_dofmap(os, c.dofmap);
  }
  {
    auto os = open_out(dir / "local_properties.csv");
    c.bddc.write_local_properties(os);
  }
  for (std::size_t s = 0; s < c.systems.size(); ++s) {
    auto os = open_out(dir / ("subdomain_" + std::to_string(s) + ".txt"));
    write_subdomain_system(os, c.systems[s]);
    auto ds = open_out(dir / ("bddc_" + std::to_string(s) + ".txt"));
    c.bddc.write_diagnostics(ds, static_cast<int>(s));
  }
}

int run_solve(const std::string& config, const std::string& name, int nsub, int order, int levels,
              const std::string& out, bool dump) {
  auto presets = load_presets(config);
  auto it = presets.find(name);
  if (it == presets.end()) {
    std::cerr << "unknown preset '" << name << "'; available:";
    for (const auto& [k, v] : presets) std::cerr << ' ' << k;
    std::cerr << '\n';
    return 2;
  }
  ExperimentPreset p = it->second;
  if (nsub > 0) p.nsub = {nsub};
  if (order > 0) p.order = order;
  if (levels > 0) p.levels = levels;
  const fs::path dir = out.empty() ? fs::path{} : fs::path(out);
  if (!out.empty()) fs::create_directories(dir);
  RowInspector inspect;
  if (dump && !out.empty()) inspect = [&](const std::string& label, const SolveContext& c) { dump_solve(dir / label, c); };
  const auto rows = run_preset(p, inspect);
  write_table_csv(std::cout, rows);
  if (!out.empty()) {
    auto os = open_out(dir / (p.name + ".csv"));
    write_table_csv(os, rows);
    for (const auto& r : rows) {
      auto rs = open_out(dir / (p.name + "_" + r.label + "_residual.csv"));
      write_residual_csv(rs, r.pcg);
    }
  }
  for (const auto& r : rows)
    if (!r.error.empty()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive forest-of-trees finite elements with a multilevel BDDC solver"};
  app.require_subcommand(1);

  std::string config = AMRBDDC_DEFAULT_CONFIG;
  app.add_option("--config", config, "Preset file (key = value sections)");

  auto* solve_cmd = app.add_subcommand("solve", "Run an experiment preset");
  std::string preset, out;
  int nsub = 0, order = 0, levels = 0;
  bool dump = false;
  solve_cmd->add_option("--preset", preset, "Preset name")->required();
  solve_cmd->add_option("--nsub", nsub, "Number of subdomains")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--order", order, "Polynomial order")->check(CLI::IsMember({1, 2, 3, 4}));
  solve_cmd->add_option("--levels", levels, "BDDC levels")->check(CLI::IsMember({2, 3}));
  solve_cmd->add_option("--out", out, "Output directory");
  solve_cmd->add_flag("--dump", dump, "Write forest, partition, DOF map, subdomain and BDDC dumps (needs --out)");

  auto* adapt_cmd = app.add_subcommand("adapt", "Adaptive refinement loop with the exact-solution indicator");
  std::string problem = "arctan3d", adapt_out, mode = "adaptive";
  int steps = 5, bins = 100, a_order = 1, a_nsub = 8, a_levels = 2, initial = 3;
  double zeta = -1.0;
  adapt_cmd->add_option("--problem", problem, "arctan2d or arctan3d")->check(CLI::IsMember({"arctan2d", "arctan3d"}));
  adapt_cmd->add_option("--steps", steps, "Refinement steps")->check(CLI::NonNegativeNumber);
  adapt_cmd->add_option("--zeta", zeta, "Fraction of elements to refine (default 0.15 linear, 0.12 higher order)");
  adapt_cmd->add_option("--bins", bins, "Histogram bins")->check(CLI::Range(2, 1 << 24));
  adapt_cmd->add_option("--order", a_order, "Polynomial order")->check(CLI::IsMember({1, 2, 3, 4}));
  adapt_cmd->add_option("--nsub", a_nsub, "Number of subdomains")->check(CLI::PositiveNumber);
  adapt_cmd->add_option("--levels", a_levels, "BDDC levels")->check(CLI::IsMember({2, 3}));
  adapt_cmd->add_option("--initial-level", initial, "Uniform level of the initial mesh")->check(CLI::Range(1, 12));
  adapt_cmd->add_option("--mode", mode, "adaptive or uniform refinement")->check(CLI::IsMember({"adaptive", "uniform"}));
  adapt_cmd->add_option("--out", adapt_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return run_solve(config, preset, nsub, order, levels, out, dump);
    if (*adapt_cmd) {
      const Problem pb = problem_from_name(problem);
      if (zeta < 0.0) zeta = a_order == 1 ? 0.15 : 0.12;
      AdaptOptions ao;
      ao.order = a_order;
      ao.steps = steps;
      ao.zeta = zeta;
      ao.bins = bins;
      ao.solver.num_subdomains = a_nsub;
      ao.solver.levels = a_levels;
      fs::path dir = adapt_out.empty() ? fs::path{} : fs::path(adapt_out);
      if (!adapt_out.empty()) fs::create_directories(dir);
      if (mode == "uniform") {
        const auto pts = convergence_report(pb, a_order, false, initial, steps, ao);
        write_convergence_dat(std::cout, pts);
        if (!adapt_out.empty()) {
          auto os = open_out(dir / "uniform.dat");
          write_convergence_dat(os, pts);
        }
        return 0;
      }
      const auto rows = adapt_loop(pb, Forest::uniform(pb.dim, initial, 1), ao);
      write_adapt_csv(std::cout, rows);
      if (!adapt_out.empty()) {
        auto os = open_out(dir / "adapt.csv");
        write_adapt_csv(os, rows);
        std::vector<ConvergencePoint> pts;
        for (const auto& r : rows) pts.push_back({r.step, r.n_dofs, r.l2_error, r.h1_error});
        auto ds = open_out(dir / "adapt.dat");
        write_convergence_dat(ds, pts);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
