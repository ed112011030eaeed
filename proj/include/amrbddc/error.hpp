#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace amrbddc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LevelCapError : public Error {
 public:
  LevelCapError(int tree, int level, std::uint64_t morton)
      : Error("refinement beyond the maximum level: tree " + std::to_string(tree) + " level " +
              std::to_string(level) + " morton " + std::to_string(morton)),
        tree(tree), level(level), morton(morton) {}
  int tree;
  int level;
  std::uint64_t morton;
};

class UnbalancedForestError : public Error {
 public:
  explicit UnbalancedForestError(std::size_t leaf)
      : Error("forest is not 2:1 balanced near leaf " + std::to_string(leaf)), leaf(leaf) {}
  std::size_t leaf;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Non-positive pivot in a Cholesky-type factorization.
class FactorizationError : public Error {
 public:
  FactorizationError(std::int64_t index, double pivot)
      : Error("non-positive pivot " + std::to_string(pivot) + " at index " + std::to_string(index)),
        index(index), pivot(pivot) {}
  std::int64_t index;
  double pivot;
};

class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(std::int64_t index)
      : Error("numerically singular matrix, zero pivot at index " + std::to_string(index)),
        index(index) {}
  std::int64_t index;
};

class SaddleSingularError : public Error {
 public:
  SaddleSingularError(int subdomain, int component)
      : Error("singular constrained subdomain problem on subdomain " + std::to_string(subdomain) +
              " component " + std::to_string(component)),
        subdomain(subdomain), component(component) {}
  int subdomain;
  int component;
};

class InsufficientConstraintsError : public Error {
 public:
  InsufficientConstraintsError(int subdomain, int component, int constraints, int kernel)
      : Error("floating component " + std::to_string(component) + " of subdomain " +
              std::to_string(subdomain) + " has " + std::to_string(constraints) +
              " constraints, needs " + std::to_string(kernel)),
        subdomain(subdomain), component(component), constraints(constraints), kernel(kernel) {}
  int subdomain;
  int component;
  int constraints;
  int kernel;
};

class IndefiniteOperatorError : public Error {
 public:
  IndefiniteOperatorError(int iteration, double curvature)
      : Error("operator not positive definite: p'Sp = " + std::to_string(curvature) +
              " at iteration " + std::to_string(iteration)),
        iteration(iteration), curvature(curvature) {}
  int iteration;
  double curvature;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace amrbddc
