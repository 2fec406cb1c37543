#pragma once

#include <stdexcept>
#include <string>

namespace ddl {

// Base of every error raised by the library. The CLI maps all of these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not chain, or a size request outside the admissible range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Data that cannot support the requested factorization (rank deficiency,
// all-zero dictionary, empty dataset).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Malformed file content: bad magic, bad header, ragged text, wrong type.
class FormatError : public Error {
 public:
  using Error::Error;
};

// File shorter or longer than its declared payload.
class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Recognised container with an unsupported version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter value (negative lambda, zero iterations, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddl
