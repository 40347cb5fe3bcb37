#pragma once

#include <stdexcept>
#include <string>

namespace bfpo {

/// Thrown when an argument violates a documented precondition.
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a pairwise comparison graph does not pin down a unique
/// zero-sum score vector.
struct UnderDetermined : std::runtime_error {
  explicit UnderDetermined(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bfpo
