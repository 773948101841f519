#pragma once

#include <stdexcept>
#include <string>

namespace qgeo {

// Base class for all toolkit errors. Subclasses map to distinct CLI exit
// codes: ConfigError -> 2, numerical aborts -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested level is closer than gap_tol to another eigenvalue.
class DegenerateLevel : public Error {
 public:
  using Error::Error;
};

// Hamiltonian fails the Hermiticity tolerance.
class NonHermitian : public Error {
 public:
  using Error::Error;
};

// Two frames are too far apart for phase alignment (|overlap| <= 0.5).
class FrameMismatch : public Error {
 public:
  using Error::Error;
};

// Finite-difference step fell below the representable floor.
class StepUnderflow : public Error {
 public:
  using Error::Error;
};

// Input outside the valid coordinate chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A finite-difference stencil point could not be evaluated or aligned.
class StencilFailure : public Error {
 public:
  using Error::Error;
};

// Quantum geometric tensor is numerically singular (chart degeneracy).
class SingularQGT : public Error {
 public:
  using Error::Error;
};

// Vector handed to the restricted resolvent has a component on the
// tracked eigenstate.
class NotOrthogonal : public Error {
 public:
  using Error::Error;
};

// Adaptive integrator could not meet its tolerance.
class StepFailure : public Error {
 public:
  using Error::Error;
};

// Convergence-order fit rejected (r^2 below threshold).
class FitRejected : public Error {
 public:
  using Error::Error;
};

// Malformed configuration file or CLI arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qgeo
