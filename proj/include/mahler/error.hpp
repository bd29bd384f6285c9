#pragma once

#include <stdexcept>
#include <string>

namespace mahler {

/// A precondition on an argument or parameter regime was violated.
class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation could not produce a trustworthy number (non-finite integrand,
/// torus zero on a node, iteration or subdivision cap).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mahler
