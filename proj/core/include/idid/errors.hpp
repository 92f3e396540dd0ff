#pragma once

#include <stdexcept>
#include <string>

namespace idid {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration (unknown keys, missing columns).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with the input data itself.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A cell that cannot be parsed as a number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& message, std::size_t row, std::string column)
      : DataError(message), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Unbalanced panel: some (unit, period) cells are absent.
class StructuralError : public DataError {
 public:
  using DataError::DataError;
};

/// The same (unit, period) pair appears more than once.
class DuplicateError : public DataError {
 public:
  using DataError::DataError;
};

/// A value outside its admissible domain (e.g. nonpositive population).
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

/// Failure inside an estimation routine (no estimable cells, degenerate design).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace idid
