#pragma once

#include <stdexcept>
#include <string>

namespace fricshare {

/// Raised when inputs violate a documented precondition or a computation
/// cannot produce a well-defined result. The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fricshare
