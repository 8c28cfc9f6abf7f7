#pragma once

#include <stdexcept>
#include <string>

namespace radarest {

/// Malformed or inconsistent configuration (bad JSON, violated invariants).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular systems, ill-conditioned information
/// matrices, rank-deficient steering matrices.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Target coincident with an array phase center (path loss undefined).
struct DegenerateGeometry : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

}  // namespace radarest
