#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mta {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented precondition (bad channel id, boundary
/// parameter values, outcomes outside {0,1} under the logit link, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite intermediate.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed journey/draws file. Carries the 1-based line and offending field.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::string field,
             const std::string& message)
      : Error(source + ":" + std::to_string(line) +
              (field.empty() ? std::string() : " [" + field + "]") + ": " +
              message),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

/// No journeys left after preprocessing.
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

/// Sampler could not find a finite starting point.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Requested operation is not defined for the given input (e.g. R-hat on a
/// single chain).
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace mta
