#pragma once

#include <stdexcept>
#include <string>

namespace glauberlab {

/// Shape or length mismatch between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain an operation is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Instance too large for exhaustive enumeration.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed input file or configuration.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical procedure failed to make progress.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace glauberlab
