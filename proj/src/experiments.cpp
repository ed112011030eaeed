#include "amrbddc/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "amrbddc/error.hpp"

namespace amrbddc {

Problem problem_from_name(const std::string& name) {
  if (name.size() < 3) throw ConfigError("unknown problem '" + name + "'");
  const std::string base = name.substr(0, name.size() - 2);
  const std::string tail = name.substr(name.size() - 2);
  if (tail != "2d" && tail != "3d") throw ConfigError("unknown problem '" + name + "'");
  const int dim = tail == "2d" ? 2 : 3;
  if (base == "poisson") return Problem::poisson_const(dim);
  if (base == "arctan") return Problem::arctan(dim);
  if (base == "elasticity") return Problem::elasticity(dim);
  throw ConfigError("unknown problem '" + name + "'");
}

namespace {

int exact_root(int n, int dim) {
  const int k = static_cast<int>(std::lround(std::pow(n, 1.0 / dim)));
  if (static_cast<int>(std::lround(std::pow(k, dim))) != n)
    throw ConfigError("regular recipe needs a perfect power subdomain count, got " + std::to_string(n));
  return k;
}

int exact_log2(int n) {
  if (n < 1 || (n & (n - 1)) != 0) throw ConfigError("H/h must be a power of two, got " + std::to_string(n));
  int l = 0;
  while ((1 << l) < n) ++l;
  return l;
}

Forest refined_forest(int dim, int uniform, int circle, int square) {
  Forest f = Forest::uniform(dim, uniform, 1);
  for (int i = 0; i < circle; ++i) f = apply_pattern(f, Pattern::Sphere);
  for (int i = 0; i < square; ++i) f = apply_pattern(f, Pattern::Box);
  return f;
}

TableRow run_row(const std::string& label, const Forest& f, const Problem& pb, const ExperimentPreset& p, int ns,
                 const RowInspector& inspect, const DofMap* dm = nullptr, SolveReport* out = nullptr) {
  TableRow row;
  row.label = label;
  row.num_subdomains = ns;
  row.num_elements = f.size();
  SolverOptions o;
  o.num_subdomains = ns;
  o.levels = p.levels;
  o.level2_subdomains = p.level2_subdomains;
  o.weights = p.weights;
  o.pcg = PcgOptions{p.tol, p.max_iterations};
  if (inspect) o.inspect = [&](const SolveContext& c) { inspect(label, c); };
  try {
    const SolveReport r = dm ? solve(f, *dm, pb, o) : solve(f, p.order, pb, o);
    row.level2_subdomains = r.levels == 3 ? (p.level2_subdomains > 0 ? p.level2_subdomains : std::max(2, ns / 8)) : 0;
    row.n = r.n;
    row.n_per_sub = static_cast<double>(r.n) / ns;
    row.n_gamma = r.n_gamma;
    row.n_coarse = r.n_coarse;
    row.iterations = r.iterations;
    row.converged = r.converged;
    row.t_setup = r.t_setup;
    row.t_pcg = r.t_pcg;
    row.coarse = r.local_coarse;
    row.factor = r.local_factor;
    row.solve = r.local_basis;
    row.pcg = r.pcg;
    if (out) *out = r;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<TableRow> run_preset(const ExperimentPreset& p, const RowInspector& inspect) {
  const Problem pb = problem_from_name(p.problem);
  const int dim = pb.dim;
  std::vector<TableRow> rows;
  switch (p.recipe) {
    case Recipe::Regular:
      for (int hh : p.hh)
        for (int ns : p.nsub) {
          const Forest f = Forest::uniform(dim, exact_log2(hh), exact_root(ns, dim));
          rows.push_back(run_row("hh" + std::to_string(hh) + "_ns" + std::to_string(ns), f, pb, p, ns, inspect));
        }
      break;
    case Recipe::Refined: {
      if (p.nsub.empty()) break;
      const Forest f = refined_forest(dim, p.uniform, p.circle, p.square);
      for (int ns : p.nsub) rows.push_back(run_row("ns" + std::to_string(ns), f, pb, p, ns, inspect));
      break;
    }
    case Recipe::Nonuniformity:
      for (int ns : p.nsub) {
        const Forest f = Forest::uniform(dim, p.uniform, 1);
        rows.push_back(run_row("uniform_ns" + std::to_string(ns), f, pb, p, ns, inspect));
        rows.push_back(run_row("uniform_ns" + std::to_string(ns + 1), f, pb, p, ns + 1, inspect));
        const Forest g = refined_forest(dim, p.uniform, 1, 1);
        rows.push_back(run_row("adapted_ns" + std::to_string(ns), g, pb, p, ns, inspect));
      }
      break;
    case Recipe::Adaptive:
      for (int ns : p.nsub) {
        Forest f = Forest::uniform(dim, p.uniform, 1);
        for (int step = 0; step <= p.steps; ++step) {
          const DofMap dm = enumerate_dofs(f, p.order);
          const int n_used = std::min<int>(ns, static_cast<int>(f.size()));
          const std::string label = "ns" + std::to_string(ns) + "_step" + std::to_string(step);
          SolveReport rep;
          rows.push_back(run_row(label, f, pb, p, n_used, inspect, &dm, &rep));
          if (step == p.steps || !rows.back().error.empty()) break;
          const auto est = estimate_error(f, dm, pb, rep.solution);
          f = balance_2to1(refine(f, mark_fraction_histogram(est.eta, p.zeta, p.bins).marked));
        }
      }
      break;
  }
  return rows;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  const auto prec = os.precision(8);
  os << "label,N_S,N_S2,n_elements,n,n_per_sub,n_gamma,n_coarse,iterations,converged,t_setup,t_pcg,"
        "coarse_min,coarse_max,coarse_avg,fact_min,fact_max,fact_avg,sol_min,sol_max,sol_avg,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    os << r.label << ',' << r.num_subdomains << ',' << r.level2_subdomains << ',' << r.num_elements << ',' << r.n << ','
       << r.n_per_sub << ',' << r.n_gamma << ',' << r.n_coarse << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
       << ',' << r.t_setup << ',' << r.t_pcg << ',' << r.coarse.min << ',' << r.coarse.max << ',' << r.coarse.avg << ','
       << r.factor.min << ',' << r.factor.max << ',' << r.factor.avg << ',' << r.solve.min << ',' << r.solve.max << ','
       << r.solve.avg << ',' << err << '\n';
  }
  os.precision(prec);
}

namespace {

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item.substr(b), &pos));
      if (item.find_first_not_of(" \t", b + pos) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list for '" + key + "': " + v);
    }
  }
  return out;
}

template <class T>
T parse_scalar(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T x{};
  if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("bad value for '" + key + "': " + v);
  return x;
}

ExperimentPreset parse_section(const std::string& name, const boost::property_tree::ptree& t) {
  ExperimentPreset p;
  p.name = name;
  for (const auto& [key, node] : t) {
    const std::string v = node.get_value<std::string>();
    if (key == "problem") {
      (void)problem_from_name(v);
      p.problem = v;
    } else if (key == "recipe") {
      if (v == "regular") p.recipe = Recipe::Regular;
      else if (v == "refined") p.recipe = Recipe::Refined;
      else if (v == "nonuniformity") p.recipe = Recipe::Nonuniformity;
      else if (v == "adaptive") p.recipe = Recipe::Adaptive;
      else throw ConfigError("unknown recipe '" + v + "' in [" + name + "]");
    } else if (key == "order") p.order = parse_scalar<int>(key, v);
    else if (key == "levels") p.levels = parse_scalar<int>(key, v);
    else if (key == "level2_subdomains") p.level2_subdomains = parse_scalar<int>(key, v);
    else if (key == "weights") {
      if (v == "cardinality") p.weights = WeightKind::Cardinality;
      else if (v == "stiffness") p.weights = WeightKind::Stiffness;
      else throw ConfigError("unknown weights '" + v + "' in [" + name + "]");
    } else if (key == "nsub") p.nsub = parse_int_list(key, v);
    else if (key == "hh") p.hh = parse_int_list(key, v);
    else if (key == "uniform") p.uniform = parse_scalar<int>(key, v);
    else if (key == "circle") p.circle = parse_scalar<int>(key, v);
    else if (key == "square") p.square = parse_scalar<int>(key, v);
    else if (key == "steps") p.steps = parse_scalar<int>(key, v);
    else if (key == "zeta") p.zeta = parse_scalar<double>(key, v);
    else if (key == "bins") p.bins = parse_scalar<int>(key, v);
    else if (key == "tol") p.tol = parse_scalar<double>(key, v);
    else if (key == "max_iterations") p.max_iterations = parse_scalar<int>(key, v);
    else throw ConfigError("unknown key '" + key + "' in [" + name + "]");
  }
  if (p.levels != 2 && p.levels != 3) throw ConfigError("levels must be 2 or 3 in [" + name + "]");
  if (p.order < 1) throw ConfigError("order must be positive in [" + name + "]");
  if (!(p.zeta > 0.0 && p.zeta < 1.0)) throw ConfigError("zeta must lie in (0, 1) in [" + name + "]");
  if (p.bins < 2) throw ConfigError("bins must be at least 2 in [" + name + "]");
  if (!(p.tol > 0.0) || p.max_iterations < 1) throw ConfigError("bad PCG limits in [" + name + "]");
  return p;
}

}  // namespace

std::map<std::string, ExperimentPreset> parse_presets(std::istream& is) {
  boost::property_tree::ptree t;
  try {
    boost::property_tree::read_ini(is, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, ExperimentPreset> out;
  for (const auto& [name, sec] : t) {
    if (sec.empty()) throw ConfigError("key '" + name + "' outside of a preset section");
    out.emplace(name, parse_section(name, sec));
  }
  return out;
}

std::map<std::string, ExperimentPreset> load_presets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_presets(in);
}

std::vector<ConvergencePoint> convergence_report(const Problem& pb, int order, bool adaptive, int start, int steps,
                                                 const AdaptOptions& opt) {
  std::vector<ConvergencePoint> pts;
  if (adaptive) {
    AdaptOptions ao = opt;
    ao.order = order;
    ao.steps = steps;
    for (const auto& r : adapt_loop(pb, Forest::uniform(pb.dim, start, 1), ao))
      pts.push_back({r.step, r.n_dofs, r.l2_error, r.h1_error});
    return pts;
  }
  for (int s = 0; s <= steps; ++s) {
    const Forest f = Forest::uniform(pb.dim, start + s, 1);
    const DofMap dm = enumerate_dofs(f, order);
    SolverOptions so = opt.solver;
    so.num_subdomains = std::min<int>(so.num_subdomains, static_cast<int>(f.size()));
    const auto rep = solve(f, dm, pb, so);
    const auto est = estimate_error(f, dm, pb, rep.solution);
    pts.push_back({s, rep.n, est.l2, est.h1});
  }
  return pts;
}

double loglog_slope(const std::vector<ConvergencePoint>& pts, bool h1) {
  if (pts.size() < 2) throw InvalidArgument("slope needs two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double x = std::log(static_cast<double>(p.n_dofs));
    const double y = std::log(h1 ? p.h1 : p.l2);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_convergence_dat(std::ostream& os, const std::vector<ConvergencePoint>& pts) {
  const auto prec = os.precision(12);
  os << "# n_dofs L2_error H1_error\n";
  for (const auto& p : pts) os << p.n_dofs << ' ' << p.l2 << ' ' << p.h1 << '\n';
  os.precision(prec);
}

}  // namespace amrbddc
