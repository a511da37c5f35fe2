#pragma once

#include <stdexcept>
#include <string>

namespace camtrap {

/// Raised for invalid user input: malformed files, broken invariants,
/// violated preconditions. The CLI maps this to exit code 2; anything
/// else escaping to main is an internal error (exit 1).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace camtrap
