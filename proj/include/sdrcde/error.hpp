#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sdrcde {

/// Bad arguments or inputs that violate an operation's preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures: singular systems, degenerate densities, stalls.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDensityError : public SolverError {
 public:
  DegenerateDensityError(const std::string& what, std::vector<double> query)
      : SolverError(what), query_(std::move(query)) {}

  const std::vector<double>& query() const { return query_; }

 private:
  std::vector<double> query_;
};

class OptimizerStalledError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace sdrcde
