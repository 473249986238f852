#pragma once

#include <stdexcept>
#include <string>

namespace erasure {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown, duplicated or mismatched register labels / dimensions.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// Matrix fails the density-matrix or unitary checks.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested object would exceed the dense simulation budget.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before meeting its stopping rule.
/// `low` and `high` bracket the quantity being computed.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double low, double high)
      : Error(what), low_(low), high_(high) {}
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

}  // namespace erasure
