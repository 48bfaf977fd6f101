#pragma once

#include <stdexcept>
#include <string>

namespace klsel {

/// Raised for malformed input and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A test enumerator broke its monotonicity / use contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace klsel
