#pragma once

#include <stdexcept>
#include <string>

namespace capnet {

// Runtime failures: non-convergence, empty calibration region, write errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad inputs: precondition violations, malformed files, out-of-range arguments.
class validation_error : public error {
 public:
  using error::error;
};

}  // namespace capnet
