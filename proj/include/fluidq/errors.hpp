#pragma once

#include <stdexcept>
#include <string>

namespace fluidq {

// Input violates a model assumption. The CLI maps this to exit code 2.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver failed to converge or hit a singular system. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A transform was evaluated beyond its abscissa of convergence.
class TransformDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fluidq
