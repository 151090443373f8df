#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ermc {

// Raised when inputs leave the range in which a bound or theorem applies.
struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};

// Reading a config or writing a report failed.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver ran out of budget; the best iterate is kept so callers
// can still inspect or report it.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, Eigen::VectorXd last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  Eigen::VectorXd last_iterate;
};

}  // namespace ermc
