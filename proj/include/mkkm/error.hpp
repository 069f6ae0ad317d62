#pragma once

#include <stdexcept>
#include <string>

namespace mkkm {

/// Raised when an input violates an operation's precondition or a
/// numerical routine cannot produce a valid result.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or command-line usage. The CLI maps this to
/// exit status 2; every other Error maps to 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mkkm
