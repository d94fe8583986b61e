#pragma once

#include <stdexcept>
#include <string>

namespace proxfact {

// Bad inputs: unreadable files, shape mismatches, parameters out of range.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-convergence, singular systems, degenerate spectra.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace proxfact
