#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mectrust {

// Invalid arguments are reported with std::invalid_argument throughout the
// library. The types below cover the remaining failure classes.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : std::runtime_error("parse error at row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the node-local solver runs out of epochs before reaching the
// requested relative duality gap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved_gap, int node = -1, int iteration = -1)
      : std::runtime_error(what), achieved_gap_(achieved_gap), node_(node), iteration_(iteration) {}

  double achieved_gap() const noexcept { return achieved_gap_; }
  int node() const noexcept { return node_; }
  int iteration() const noexcept { return iteration_; }

 private:
  double achieved_gap_;
  int node_;
  int iteration_;
};

}  // namespace mectrust
