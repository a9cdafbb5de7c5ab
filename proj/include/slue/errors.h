#pragma once

#include <stdexcept>
#include <string>

namespace slue {

/// Malformed or out-of-contract arguments.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A point projected with nonpositive depth.
class ChiralityError : public std::domain_error {
 public:
  explicit ChiralityError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace slue
