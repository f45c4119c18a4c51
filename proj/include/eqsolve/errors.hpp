#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqsolve {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line), column_(column), message_(message) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class SyntaxError : public ParseError {
public:
  using ParseError::ParseError;
};

class UnknownFunction : public ParseError {
public:
  UnknownFunction(std::size_t line, std::size_t column, const std::string& name)
      : ParseError(line, column, "unknown function '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

class UnbalancedParentheses : public ParseError {
public:
  using ParseError::ParseError;
};

// ---------------------------------------------------------------------------
// Evaluation

/// Raised when an expression is evaluated outside the domain of one of its
/// operations (log of a non-positive value, division by zero, overflow, ...).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what, std::optional<std::size_t> equation = std::nullopt)
      : Error(equation ? "equation " + std::to_string(*equation) + ": " + what : what),
        reason_(what), equation_(equation) {}

  const std::string& reason() const noexcept { return reason_; }
  std::optional<std::size_t> equation() const noexcept { return equation_; }

private:
  std::string reason_;
  std::optional<std::size_t> equation_;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Linear algebra

class NotLinear : public Error {
public:
  NotLinear(std::size_t equation, std::vector<double> probe)
      : Error("equation " + std::to_string(equation) + " is not linear in its variables"),
        equation_(equation), probe_(std::move(probe)) {}

  std::size_t equation() const noexcept { return equation_; }
  const std::vector<double>& probe() const noexcept { return probe_; }

private:
  std::size_t equation_;
  std::vector<double> probe_;
};

class NonSquare : public Error {
public:
  NonSquare(std::size_t rows, std::size_t cols)
      : Error("system is not square (" + std::to_string(rows) + " equations, " + std::to_string(cols) +
              " unknowns)"),
        rows_(rows), cols_(cols) {}
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

private:
  std::size_t rows_;
  std::size_t cols_;
};

class Inconsistent : public Error {
public:
  Inconsistent() : Error("linear system is inconsistent (rank(A) < rank([A|b]))") {}
};

class SingularMatrix : public Error {
public:
  SingularMatrix() : Error("matrix is singular") {}
};

// ---------------------------------------------------------------------------
// Configuration and I/O

class InvalidConfig : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  IoError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace eqsolve
