#pragma once

#include <stdexcept>

namespace macdisp {

// Bad documents, dimensions, or parameter values.  The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-convergent quadrature, non-PSD matrices, singular whitening.  Exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace macdisp
