#pragma once

#include <stdexcept>
#include <string>

namespace dmaloc {

// Invalid scenario, geometry, or CLI input. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular covariance, unidentifiable FIM, degenerate
// geometry. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A UE coincides with a metamaterial element.
class DegenerateGeometry : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// R_n has a zero diagonal entry (a microstrip whose weights are all off).
class SingularCovariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// FIM is singular or too ill-conditioned to invert.
class UnidentifiableConfiguration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A solver's work estimate exceeds the configured cap.
class WorkCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmaloc
