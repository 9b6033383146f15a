#pragma once

#include <stdexcept>
#include <string>

namespace besselgap {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inputs violate a configuration rule (ParameterSet gate, CLI validation).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical method failed to deliver its contract: non-convergence,
// step-size floor, blow-up, exact singularity.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace besselgap
