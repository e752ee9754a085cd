#pragma once

#include <stdexcept>
#include <string>

namespace mgfe {

// Raised when a request exceeds a hard size guard (dense paths, subset
// enumeration, shot budgets).  Distinct from invalid_argument so callers can
// map it to a dedicated exit status.
struct capacity_error : std::runtime_error {
  explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a matrix logarithm is requested for an operator with an
// eigenvalue at -1: the principal branch is ambiguous there and we refuse to
// pick one silently.
struct branch_ambiguity_error : std::runtime_error {
  explicit branch_ambiguity_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mgfe
