#pragma once

#include <stdexcept>
#include <string>

namespace sconv {

/// Root of every error thrown by the library. Each subclass maps onto one
/// failure class of the CLI exit-code table (see tools/sconv.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Argument valid in principle but outside the supported range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a pole (Gamma at non-positive integers, cot poles, ...).
class PoleError : public Error {
 public:
  using Error::Error;
};

/// Kernel sampled on its singular sphere |y| = 1.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Grid function not negligible at the boundary of the computational cube.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Requested feature cannot be represented on the grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class EmptyBatteryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sconv
