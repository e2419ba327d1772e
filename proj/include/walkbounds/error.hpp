#pragma once

#include <stdexcept>
#include <string>

namespace walkbounds {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed element, measure, spec or config field.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A function evaluated outside of its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A support-size or memory budget was exhausted. `reached` is the step,
/// radius or truncation order at which the computation stopped.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, long reached)
      : Error(what), reached_(reached) {}
  long reached() const noexcept { return reached_; }

 private:
  long reached_;
};

}  // namespace walkbounds
