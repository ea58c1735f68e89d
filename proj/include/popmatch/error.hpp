#pragma once

#include <stdexcept>
#include <string>

namespace popmatch {

/// Error type thrown by every popmatch operation on contract violations
/// (bad input files, invalid configuration, numerically infeasible problems).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input validation failure (out-of-range value, malformed row, bad config).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

}  // namespace popmatch
