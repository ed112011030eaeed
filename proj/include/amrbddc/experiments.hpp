#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "amrbddc/adaptivity.hpp"
#include "amrbddc/problems.hpp"
#include "amrbddc/solver.hpp"

namespace amrbddc {

// poisson2d, poisson3d, arctan2d, arctan3d, elasticity2d, elasticity3d
[[nodiscard]] Problem problem_from_name(const std::string& name);

enum class Recipe {
  Regular,        // k^d trees at level log2(H/h), one subdomain per tree
  Refined,        // uniform, circle and square refinement passes on the unit cell
  Nonuniformity,  // uniform N_S, uniform N_S + 1, uniform plus one circle and one square pass with N_S
  Adaptive,       // solve-estimate-mark-refine loop
};

struct ExperimentPreset {
  std::string name;
  std::string problem{"poisson3d"};
  Recipe recipe{Recipe::Regular};
  int order{1};
  int levels{2};
  int level2_subdomains{0};
  WeightKind weights{WeightKind::Cardinality};
  std::vector<int> nsub{8};
  std::vector<int> hh{4};  // Regular only
  int uniform{3};          // Refined, Nonuniformity (base level), Adaptive (initial level)
  int circle{0};
  int square{0};
  int steps{5};  // Adaptive
  double zeta{0.15};
  int bins{100};
  double tol{1e-6};
  int max_iterations{500};
};

struct TableRow {
  std::string label;
  int num_subdomains{0};
  int level2_subdomains{0};  // 0 with two levels
  std::size_t num_elements{0};
  std::size_t n{0};
  double n_per_sub{0.0};
  int n_gamma{0};
  int n_coarse{0};
  int iterations{0};
  bool converged{false};
  double t_setup{0.0};
  double t_pcg{0.0};
  Summary coarse, factor, solve;
  std::string error;  // non-empty when the solver failed for this row
  PcgResult pcg;
};

// Hook to inspect each solve while a preset runs.
using RowInspector = std::function<void(const std::string& label, const SolveContext&)>;

[[nodiscard]] std::vector<TableRow> run_preset(const ExperimentPreset& p, const RowInspector& inspect = {});

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);

// key = value sections, one per preset.
[[nodiscard]] std::map<std::string, ExperimentPreset> parse_presets(std::istream& is);
[[nodiscard]] std::map<std::string, ExperimentPreset> load_presets(const std::string& path);

struct ConvergencePoint {
  int step{0};
  std::size_t n_dofs{0};
  double l2{0.0};
  double h1{0.0};
};

// Uniform: levels start..start+steps. Adaptive: adapt loop from the start level.
[[nodiscard]] std::vector<ConvergencePoint> convergence_report(const Problem& pb, int order, bool adaptive, int start,
                                                               int steps, const AdaptOptions& opt = {});
// Least-squares slope of log(error) against log(n_dofs) over the given points.
[[nodiscard]] double loglog_slope(const std::vector<ConvergencePoint>& pts, bool h1);
// gnuplot-friendly columns: n_dofs l2 h1
void write_convergence_dat(std::ostream& os, const std::vector<ConvergencePoint>& pts);

}  // namespace amrbddc
