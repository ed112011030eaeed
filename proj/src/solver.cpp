#include "amrbddc/solver.hpp"

#include <algorithm>
#include <chrono>

#include "amrbddc/assembly.hpp"
#include "amrbddc/substructuring.hpp"

namespace amrbddc {

Summary summarize(const std::vector<double>& v) {
  if (v.empty()) return {};
  Summary s{v.front(), v.front(), 0.0};
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    s.avg += x;
  }
  s.avg /= static_cast<double>(v.size());
  return s;
}

SolveReport solve(const Forest& f, const DofMap& dm, const Problem& pb, const SolverOptions& opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SolveReport rep;
  const Partition part = partition_equal(f.size(), opt.num_subdomains);
  const ComponentLabeling comps = detect_components(f, part, opt.adjacency);
  const Assembler asm_(f, dm, pb);
  const auto systems = asm_.subassemble_all(part, comps);
  const InterfaceMap im = classify_interface(std::span<const SubdomainSystem>(systems));
  const SchurComplement S(systems, im);

  BddcOptions bo;
  bo.weights = opt.weights;
  bo.corners = opt.corners.value_or(pb.kind == ProblemKind::Elasticity);
  bo.kernel_dim = pb.kernel_dim();
  bo.levels = opt.levels;
  bo.level2_subdomains = opt.level2_subdomains > 0 ? opt.level2_subdomains : std::max(2, opt.num_subdomains / 8);
  const Bddc M(systems, im, bo);
  const auto g = S.reduced_rhs();
  const auto t1 = clock::now();
  if (opt.inspect) opt.inspect(SolveContext{f, dm, part, comps, systems, im, M});

  rep.pcg = pcg([&](auto x, auto y) { S.apply(x, y); }, [&](auto x, auto y) { M.apply(x, y); }, g, opt.pcg);
  rep.solution = S.recover(rep.pcg.x, asm_.dofs());
  const auto t2 = clock::now();

  rep.num_subdomains = part.num_subdomains;
  rep.num_elements = f.size();
  rep.n = asm_.dofs().num_dofs;
  rep.n_free = asm_.dofs().num_free();
  rep.n_gamma = im.size();
  rep.n_coarse = M.coarse_size();
  rep.levels = M.levels();
  rep.iterations = rep.pcg.iterations;
  rep.converged = rep.pcg.converged;
  rep.t_setup = std::chrono::duration<double>(t1 - t0).count();
  rep.t_pcg = std::chrono::duration<double>(t2 - t1).count();
  std::vector<double> nd, nc, tf, tb;
  const auto counts = M.local_coarse_counts(true);
  for (int s = 0; s < part.num_subdomains; ++s) {
    nd.push_back(systems[static_cast<std::size_t>(s)].size());
    nc.push_back(counts[static_cast<std::size_t>(s)]);
    tf.push_back(M.local_factor_seconds(s));
    tb.push_back(M.local_basis_seconds(s));
  }
  rep.local_dofs = summarize(nd);
  rep.local_coarse = summarize(nc);
  rep.local_factor = summarize(tf);
  rep.local_basis = summarize(tb);
  return rep;
}

SolveReport solve(const Forest& f, int order, const Problem& pb, const SolverOptions& opt) {
  const DofMap dm = enumerate_dofs(f, order);
  return solve(f, dm, pb, opt);
}

}  // namespace amrbddc
