#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mplab {

/// Error categories surfaced by the library. The CLI maps these onto exit
/// codes and the machine-readable error object.
enum class ErrorKind {
  Config,        // malformed or invalid user input
  Domain,        // operands on different grids, bad sizes
  Incompatible,  // half-space not compatible with the domain / function
  Numeric,       // non-finite values
  Solver,        // linear or nonlinear solver failure
  Geometry,      // functional lacks the shape an operation requires
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mplab
