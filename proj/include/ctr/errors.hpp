#pragma once

#include <stdexcept>
#include <string>

namespace ctr {

/// Bad arguments, contract violations, invalid configs. Maps to exit code 2
/// in the CLI; everything else non-zero maps to 3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input parses as *something* but clearly is not the expected format
/// (e.g. a majority of malformed lines in a transaction log).
struct FormatError : IoError {
  using IoError::IoError;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ctr
