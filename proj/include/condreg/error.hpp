#pragma once

#include <stdexcept>
#include <string>

namespace condreg {

// Precondition or input validation failure (bad polygon, out-of-range
// parameter, malformed file). The CLI maps it to exit status 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical step did not meet its postcondition (factorisation failed,
// residual too large). The CLI maps it to exit status 3.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace condreg
