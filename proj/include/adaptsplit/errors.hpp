#pragma once

#include <stdexcept>
#include <string>

namespace adaptsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// No configured route connects two nodes.
class NoRoute : public Error {
 public:
  using Error::Error;
};

/// Exhaustive search would exceed the configured enumeration budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// No assignment satisfies the placement constraints.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// A scenario or simulation configuration cannot be used as given.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace adaptsplit
