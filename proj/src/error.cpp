#include "aurora/error.hpp"

#include <utility>

namespace aurora {

namespace {

std::string describe(std::size_t row, const std::string& column, const std::string& what) {
  std::string msg = "row " + std::to_string(row);
  if (!column.empty()) msg += ", column '" + column + "'";
  return msg + ": " + what;
}

}  // namespace

ParseError::ParseError(std::size_t row, std::string column, const std::string& what)
    : DataError(describe(row, column, what)), row_(row), column_(std::move(column)) {}

}  // namespace aurora
