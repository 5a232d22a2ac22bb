#pragma once

#include <stdexcept>
#include <string>

namespace budgetwise {

/// Base class for all library errors. Everything thrown on a validation or
/// feasibility failure derives from this, so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two vectors that must share a length (groups or sources) do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value is outside its admissible domain (probabilities, costs, budgets).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A sampling plan with zero total samples was used where data is required.
class InvalidPlanError : public Error {
 public:
  using Error::Error;
};

/// Some target group has positive mass but no source can ever produce it.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The budget cannot afford a single sample.
class BudgetTooSmallError : public Error {
 public:
  using Error::Error;
};

/// An enumeration exceeded its caller-imposed state limit.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// Importance weights are undefined (zero mixture mass on an observed group).
class InvalidWeightsError : public Error {
 public:
  using Error::Error;
};

/// Not enough data to run the requested fit or bound.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A configuration file failed schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace budgetwise
