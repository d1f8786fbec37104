#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aurora {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: corpus rows, bundle files, WAV files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Corpus CSV schema violation. Rows are 1-based data rows (header excluded);
/// column is the header name, or empty when the whole row is at fault.
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// A function was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Geometry too degenerate to define a transform (coincident points).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace aurora
