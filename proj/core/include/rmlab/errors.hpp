#pragma once

#include <stdexcept>
#include <string>

namespace rmlab {

/// Base class for all rmlab failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible shapes. The message reports both shapes.
struct DimensionError : Error {
  using Error::Error;
};

/// A mathematical invariant failed to hold. The message names the inequality.
struct InvariantError : Error {
  using Error::Error;
};

/// An input exceeds one of the desk-scale guards.
struct GuardError : Error {
  using Error::Error;
};

/// Invalid configuration: bad JSON, missing parameter, out-of-range value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rmlab
