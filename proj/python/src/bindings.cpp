#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "amrbddc/adaptivity.hpp"
#include "amrbddc/error.hpp"
#include "amrbddc/experiments.hpp"

namespace py = pybind11;
using namespace amrbddc;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<char> to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& m) {
  return {m.data(), m.data() + m.size()};
}

py::dict summary(const Summary& s) { return py::dict(py::arg("min") = s.min, py::arg("max") = s.max, py::arg("avg") = s.avg); }

py::dict adapt_row(const AdaptStep& r) {
  return py::dict(py::arg("step") = r.step, py::arg("n_elements") = r.n_elements, py::arg("n_dofs") = r.n_dofs,
                  py::arg("n_gamma") = r.n_gamma, py::arg("n_coarse") = r.n_coarse, py::arg("iterations") = r.iterations,
                  py::arg("setup_time") = r.setup_time, py::arg("pcg_time") = r.pcg_time,
                  py::arg("l2_error") = r.l2_error, py::arg("h1_error") = r.h1_error);
}

SolverOptions solver_options(int nsub, int levels, int level2, const std::string& weights, double tol, int maxit) {
  SolverOptions o;
  o.num_subdomains = nsub;
  o.levels = levels;
  o.level2_subdomains = level2;
  if (weights == "cardinality") o.weights = WeightKind::Cardinality;
  else if (weights == "stiffness") o.weights = WeightKind::Stiffness;
  else throw InvalidArgument("weights must be 'cardinality' or 'stiffness'");
  o.pcg.tol = tol;
  o.pcg.max_iterations = maxit;
  return o;
}

}  // namespace

PYBIND11_MODULE(_amrbddc, m) {
  m.doc() = "Adaptive hexahedral finite elements with a BDDC-preconditioned interface solver";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<Pattern>(m, "Pattern").value("UNIFORM", Pattern::Uniform).value("SPHERE", Pattern::Sphere).value("BOX", Pattern::Box);

  py::class_<Forest>(m, "Forest")
      .def_static("uniform", &Forest::uniform, py::arg("dim"), py::arg("level"), py::arg("trees_per_axis") = 1)
      .def_property_readonly("dim", &Forest::dim)
      .def_property_readonly("trees_per_axis", &Forest::trees_per_axis)
      .def("__len__", &Forest::size)
      .def("leaves",
           [](const Forest& f) {
             std::vector<std::tuple<int, int, std::uint64_t>> out;
             for (const auto& c : f.leaves()) out.emplace_back(c.tree, c.level, c.morton);
             return out;
           },
           "(tree, level, morton) per leaf in curve order")
      .def("levels",
           [](const Forest& f) {
             py::array_t<int> a(static_cast<py::ssize_t>(f.size()));
             for (std::size_t i = 0; i < f.size(); ++i) a.mutable_data()[i] = f.leaf(i).level;
             return a;
           })
      .def("corners",
           [](const Forest& f) {
             py::array_t<double> a({static_cast<py::ssize_t>(f.size()), py::ssize_t{3}});
             auto r = a.mutable_unchecked<2>();
             for (std::size_t i = 0; i < f.size(); ++i) {
               const auto x = f.physical_corner(f.leaf(i));
               for (int d = 0; d < 3; ++d) r(static_cast<py::ssize_t>(i), d) = x[static_cast<std::size_t>(d)];
             }
             return a;
           },
           "lower corner of every leaf")
      .def("refine", [](const Forest& f, const py::array_t<bool, py::array::c_style | py::array::forcecast>& mark) {
        if (static_cast<std::size_t>(mark.size()) != f.size()) throw DimensionMismatch("mask length must equal the leaf count");
        return refine(f, to_mask(mark));
      })
      .def("balance", &balance_2to1)
      .def("is_balanced", &is_balanced)
      .def("apply_pattern", &apply_pattern)
      .def("dumps", [](const Forest& f) {
        std::ostringstream os;
        write_forest(os, f);
        return os.str();
      })
      .def_static("loads", [](const std::string& s) {
        std::istringstream is(s);
        return read_forest(is);
      });

  py::class_<Problem>(m, "Problem")
      .def_static("poisson", &Problem::poisson_const, py::arg("dim"))
      .def_static("arctan", &Problem::arctan, py::arg("dim"))
      .def_static("elasticity", &Problem::elasticity, py::arg("dim"), py::arg("young") = 1e10,
                  py::arg("poisson") = 1.0 / 3.0)
      .def_static("from_name", &problem_from_name)
      .def_property_readonly("dim", [](const Problem& p) { return p.dim; })
      .def_property_readonly("name", &Problem::name)
      .def_property_readonly("components", &Problem::components)
      .def("exact", [](const Problem& p, double x, double y, double z) { return p.exact({x, y, z}); }, py::arg("x"),
           py::arg("y"), py::arg("z") = 0.0)
      .def("source", [](const Problem& p, double x, double y, double z) { return p.source({x, y, z}); }, py::arg("x"),
           py::arg("y"), py::arg("z") = 0.0);

  m.def(
      "solve",
      [](const Forest& f, int order, const Problem& pb, int nsub, int levels, int level2, const std::string& weights,
         double tol, int maxit) {
        const auto o = solver_options(nsub, levels, level2, weights, tol, maxit);
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = solve(f, order, pb, o);
        }
        py::dict d;
        d["num_subdomains"] = r.num_subdomains;
        d["num_elements"] = r.num_elements;
        d["n"] = r.n;
        d["n_free"] = r.n_free;
        d["n_gamma"] = r.n_gamma;
        d["n_coarse"] = r.n_coarse;
        d["levels"] = r.levels;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["t_setup"] = r.t_setup;
        d["t_pcg"] = r.t_pcg;
        d["local_dofs"] = summary(r.local_dofs);
        d["local_coarse"] = summary(r.local_coarse);
        d["residuals"] = to_array(r.pcg.history);
        d["solution"] = to_array(r.solution);
        return d;
      },
      py::arg("forest"), py::arg("order"), py::arg("problem"), py::arg("nsub") = 8, py::arg("levels") = 2,
      py::arg("level2_subdomains") = 0, py::arg("weights") = "cardinality", py::arg("tol") = 1e-6,
      py::arg("max_iterations") = 500,
      "Solve with BDDC-preconditioned CG; the solution holds one value per global dof.");

  m.def(
      "estimate_error",
      [](const Forest& f, int order, const Problem& pb, const py::array_t<double, py::array::c_style | py::array::forcecast>& u) {
        const DofMap dm = enumerate_dofs(f, order);
        if (static_cast<std::size_t>(u.size()) != dm.num_nodes()) throw DimensionMismatch("one value per node expected");
        const auto e = estimate_error(f, dm, pb, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
        return py::make_tuple(to_array(e.eta), e.l2, e.h1);
      },
      py::arg("forest"), py::arg("order"), py::arg("problem"), py::arg("u"),
      "Per-element H1-seminorm error against the exact solution, plus global L2 and H1 errors.");

  m.def(
      "mark_histogram",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& eta, double zeta, int bins) {
        const auto h = mark_fraction_histogram(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())),
                                               zeta, bins);
        py::array_t<bool> marked(static_cast<py::ssize_t>(h.marked.size()));
        std::copy(h.marked.begin(), h.marked.end(), marked.mutable_data());
        return py::make_tuple(h.theta_hat, marked);
      },
      py::arg("eta"), py::arg("zeta"), py::arg("bins") = 100, "Histogram fraction marking; returns (threshold, mask).");

  m.def(
      "adapt",
      [](const Problem& pb, int initial_level, int steps, double zeta, int bins, int order, int nsub) {
        AdaptOptions o;
        o.order = order;
        o.steps = steps;
        o.zeta = zeta;
        o.bins = bins;
        o.solver.num_subdomains = nsub;
        std::vector<AdaptStep> rows;
        Forest last;
        {
          py::gil_scoped_release release;
          rows = adapt_loop(pb, Forest::uniform(pb.dim, initial_level), o, &last);
        }
        py::list out;
        for (const auto& r : rows) out.append(adapt_row(r));
        return py::make_tuple(out, last);
      },
      py::arg("problem"), py::arg("initial_level") = 3, py::arg("steps") = 5, py::arg("zeta") = 0.15,
      py::arg("bins") = 100, py::arg("order") = 1, py::arg("nsub") = 8,
      "Adaptive loop; returns the per-step rows and the final forest.");
}
