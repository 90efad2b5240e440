#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ampc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input does not have the shape an algorithm requires (not a union of
/// cycles, broken list, forest with a cycle, ...).
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A mapping or identifier falls outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A record or residual instance does not fit the space it is given.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A machine exceeded its per-round query or write budget in strict mode.
class BudgetViolation : public Error {
 public:
  BudgetViolation(const std::string& what, std::uint64_t machine)
      : Error(what), machine_(machine) {}
  std::uint64_t machine() const { return machine_; }

 private:
  std::uint64_t machine_;
};

/// An iterative algorithm hit its iteration cap.
class NonTerminationError : public Error {
 public:
  using Error::Error;
};

/// A high-degree vertex found no leader in its neighborhood (strict mode).
class LeaderSamplingFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or experiment description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed graph text file.
class GraphFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ampc
