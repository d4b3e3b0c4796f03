#pragma once

#include <stdexcept>
#include <string>

namespace scorauc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: malformed spec, out-of-range parameter, broken precondition.
struct ValidationError : Error {
  using Error::Error;
};

// No nonnegative price reaches the requested score.
struct InfeasibleError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// A pseudotype root fell outside the extended fixed-cost range.
struct RangeError : Error {
  using Error::Error;
};

struct DegenerateError : Error {
  using Error::Error;
};

// Two independent computations that must agree did not.
struct InconsistencyError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace scorauc
