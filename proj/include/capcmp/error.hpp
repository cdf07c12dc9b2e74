#pragma once

#include <stdexcept>
#include <string>

namespace capcmp {

/// Argument outside an operation's mathematical domain (negative SNR,
/// unsupported modulation order, N < L, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature failed to reach the requested tolerance.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite-difference step too small for the accuracy of the function
/// values it differences.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-algebra breakdown (singular Toeplitz system and the like).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace capcmp
