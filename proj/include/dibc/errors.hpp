#pragma once

#include <stdexcept>
#include <string>

namespace dibc {

/// Raised when a caller violates an operation's usage contract (bad input
/// index, round regression, wrong pair count, missing transcript field).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Out-of-range numeric parameters (angles, visibilities, supra-quantum
// violations) throw std::domain_error.

}  // namespace dibc
