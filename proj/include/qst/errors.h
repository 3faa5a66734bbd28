#pragma once

#include <stdexcept>
#include <string>

namespace qst {

// Invalid input: malformed spec, bad arguments, broken preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Argument outside the mathematical domain of a formula.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The minor engine only covers quadratic (Delta = 0) Hamiltonians.
class FreeFermionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int index)
      : std::runtime_error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

// An internally constructed object broke an invariant it must satisfy.
class ConstructionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qst
