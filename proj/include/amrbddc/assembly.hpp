#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "amrbddc/dofmap.hpp"
#include "amrbddc/forest.hpp"
#include "amrbddc/linalg/sparse.hpp"
#include "amrbddc/problems.hpp"

namespace amrbddc {

// Reference element data for tensor GLL Lagrange elements on the unit cell.
class ReferenceElement {
 public:
  ReferenceElement(int dim, int order);
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int nodes() const { return npe_; }
  [[nodiscard]] const std::vector<double>& gll() const { return xi_; }
  // Basis values and reference gradients at a point of the unit cell.
  void evaluate(const std::array<double, 3>& s, Eigen::VectorXd& phi, Eigen::MatrixXd& dphi) const;
  // Unit-cell matrices; a cell of size h scales stiffness by h^(dim-2).
  [[nodiscard]] Eigen::MatrixXd laplace() const;
  [[nodiscard]] Eigen::MatrixXd elasticity(double lambda, double mu) const;
  [[nodiscard]] Eigen::VectorXd integrals() const;

 private:
  int dim_, order_, npe_;
  std::vector<double> xi_;
};

[[nodiscard]] Eigen::MatrixXd element_poisson(int dim, int order, double h);
[[nodiscard]] Eigen::MatrixXd element_elasticity(int dim, int order, double h, double lambda, double mu);
// Element load vector for the problem on the cell with corner x0 and size h.
[[nodiscard]] Eigen::VectorXd element_load(const Problem& pb, const ReferenceElement& ref,
                                           const std::array<double, 3>& x0, double h);
// A <- T^T A T, f <- T^T f with T acting per node on ncomp components.
void transform_element(Eigen::MatrixXd& A, Eigen::VectorXd& f, const Eigen::MatrixXd& T, int ncomp);

// Assembled subdomain problem after Dirichlet elimination.
struct SubdomainSystem {
  int id{0};
  int ncomp{1};
  linalg::SymSparse A;
  std::vector<double> f;
  std::vector<std::int64_t> global_dofs;  // sorted; global dof = node * ncomp + component
  std::vector<int> comp_ptr{0};           // local dof -> subdomain components touching it
  std::vector<int> comp_list;
  int num_components{1};
  std::vector<char> component_anchored;   // component touches the Dirichlet boundary
  std::vector<std::array<double, 3>> coords;
  std::vector<std::size_t> elements;
  std::vector<int> fields;  // explicit solution component per local dof, overrides the id rule

  [[nodiscard]] int size() const { return static_cast<int>(global_dofs.size()); }
  [[nodiscard]] int field(int local) const {
    const auto l = static_cast<std::size_t>(local);
    return fields.empty() ? static_cast<int>(global_dofs[l] % ncomp) : fields[l];
  }
  [[nodiscard]] std::span<const int> components_of(int local) const {
    const auto l = static_cast<std::size_t>(local);
    return {comp_list.data() + comp_ptr[l], static_cast<std::size_t>(comp_ptr[l + 1] - comp_ptr[l])};
  }
  [[nodiscard]] int local_of(std::int64_t global) const;
};

struct GlobalDofs {
  int ncomp{1};
  std::size_t num_dofs{0};
  std::vector<char> dirichlet;  // per global dof
  std::vector<double> values;   // Dirichlet values, zero elsewhere
  [[nodiscard]] std::size_t num_free() const;
};

[[nodiscard]] GlobalDofs dirichlet_data(const DofMap& dm, const Problem& pb);

class Assembler {
 public:
  Assembler(const Forest& f, const DofMap& dm, const Problem& pb);
  [[nodiscard]] SubdomainSystem subassemble(const Partition& part, const ComponentLabeling& comps, int s) const;
  [[nodiscard]] std::vector<SubdomainSystem> subassemble_all(const Partition& part, const ComponentLabeling& comps) const;
  // Whole-domain system; a single subdomain.
  [[nodiscard]] SubdomainSystem assemble_global() const;
  [[nodiscard]] const GlobalDofs& dofs() const { return dofs_; }
  // Element matrix and load after the transition, ordered by slot and component.
  void element_system(std::size_t e, Eigen::MatrixXd& K, Eigen::VectorXd& f) const;

 private:
  SubdomainSystem assemble_range(const std::vector<std::size_t>& elements, const std::vector<int>& comp, int id) const;

  const Forest& forest_;
  const DofMap& dm_;
  Problem pb_;
  ReferenceElement ref_;
  Eigen::MatrixXd kref_;
  Eigen::VectorXd iref_;
  GlobalDofs dofs_;
};

void write_subdomain_system(std::ostream& os, const SubdomainSystem& s);
// Reads matrix, rhs and map back; the result has one component and no coordinates.
[[nodiscard]] SubdomainSystem read_subdomain_system(std::istream& is, int ncomp = 1);

}  // namespace amrbddc
