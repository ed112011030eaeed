#include "amrbddc/problems.hpp"

#include <cmath>

#include "amrbddc/error.hpp"

namespace amrbddc {

Problem Problem::poisson_const(int dim) {
  Problem p;
  p.kind = ProblemKind::PoissonConst;
  p.dim = dim;
  return p;
}

Problem Problem::arctan(int dim) {
  Problem p;
  p.kind = ProblemKind::PoissonArctan;
  p.dim = dim;
  if (dim == 2) p.center[2] = 0.0;
  return p;
}

Problem Problem::elasticity(int dim, double young, double poisson) {
  Problem p;
  p.kind = ProblemKind::Elasticity;
  p.dim = dim;
  p.young = young;
  p.poisson = poisson;
  if (dim == 2) p.force = {0.0, -1e5, 0.0};
  (void)p.lame_lambda();
  return p;
}

namespace {
double radial(const Problem& p, const std::array<double, 3>& x) {
  double r2 = 0.0;
  for (int a = 0; a < p.dim; ++a) r2 += (x[a] - p.center[a]) * (x[a] - p.center[a]);
  return std::sqrt(r2);
}
}  // namespace

double Problem::exact(const std::array<double, 3>& x) const {
  if (kind != ProblemKind::PoissonArctan) return 0.0;
  return std::atan(sharpness * (radial(*this, x) - radius));
}

std::array<double, 3> Problem::exact_gradient(const std::array<double, 3>& x) const {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  if (kind != ProblemKind::PoissonArctan) return g;
  const double r = radial(*this, x);
  const double t = sharpness * (r - radius);
  const double du = sharpness / (1.0 + t * t);
  for (int a = 0; a < dim; ++a) g[a] = du * (x[a] - center[a]) / r;
  return g;
}

double Problem::source(const std::array<double, 3>& x) const {
  switch (kind) {
    case ProblemKind::PoissonConst:
      return 1.0;
    case ProblemKind::PoissonArctan: {
      const double r = radial(*this, x);
      const double t = sharpness * (r - radius);
      const double q = 1.0 + t * t;
      const double du = sharpness / q;
      const double ddu = -2.0 * sharpness * sharpness * t / (q * q);
      return -(ddu + (dim - 1) * du / r);
    }
    case ProblemKind::Elasticity:
      return 0.0;
  }
  return 0.0;
}

double Problem::dirichlet(const std::array<double, 3>& x, int) const { return exact(x); }

double Problem::lame_lambda() const {
  if (!(poisson < 0.5) || poisson <= -1.0) throw InvalidArgument("Poisson ratio must lie in (-1, 0.5)");
  return poisson * young / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
}

double Problem::lame_mu() const { return young / (2.0 * (1.0 + poisson)); }

int Problem::kernel_dim() const {
  if (kind != ProblemKind::Elasticity) return 1;
  return dim == 3 ? 6 : 3;
}

std::string Problem::name() const {
  switch (kind) {
    case ProblemKind::PoissonConst:
      return "poisson";
    case ProblemKind::PoissonArctan:
      return "arctan";
    case ProblemKind::Elasticity:
      return "elasticity";
  }
  return "unknown";
}

}  // namespace amrbddc
