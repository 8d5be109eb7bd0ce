#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finsler {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset, int line, int column)
      : std::runtime_error(message + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        offset_(offset),
        line_(line),
        column_(column) {}

  std::size_t offset() const noexcept { return offset_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::size_t offset_;
  int line_;
  int column_;
};

// Unbound symbol or otherwise unevaluable expression.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sqrt/log of a negative value, division by zero, non-smooth point of a jet.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Value part of a matrix (metric, L-metric) is numerically singular.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InadmissiblePointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model definition or invalid configuration supplied by the user.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finsler
