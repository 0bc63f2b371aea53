#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrodinger {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite intermediate exceeded the overflow guard (1e300) or a value left
/// the representable range of [0, inf].
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Negative, NaN or IEEE-infinite input where an extended nonnegative real is
/// required.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Structural validation failure of problem data (missing field, negative
/// weight, marginal not summing to one, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in an input file, with the location that triggered it.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::string field,
             const std::string& what)
      : Error(file + ":" + std::to_string(line) +
              (field.empty() ? std::string() : " [" + field + "]") + ": " + what),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

/// The reduced problem violates the support conditions: some x has no
/// reachable y (condition i) or some y no reachable x (condition ii).
class IrreducibleProblem : public Error {
 public:
  IrreducibleProblem(const std::string& what, std::vector<std::size_t> rows,
                     std::vector<std::size_t> cols)
      : Error(what), rows_(std::move(rows)), cols_(std::move(cols)) {}

  /// Original x indices whose kernel row has no admissible column.
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  /// Original y indices whose kernel column has no admissible row.
  const std::vector<std::size_t>& cols() const noexcept { return cols_; }

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class NonFiniteIntermediate : public Error {
 public:
  using Error::Error;
};

class DegeneratePotential : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  PreconditionFailed(std::string condition, std::size_t index,
                     const std::string& what)
      : Error(what), condition_(std::move(condition)), index_(index) {}

  /// Which precondition failed, e.g. "psi-finite" or "phi-finite".
  const std::string& condition() const noexcept { return condition_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string condition_;
  std::size_t index_;
};

class NotSPD : public Error {
 public:
  using Error::Error;
};

class DegenerateBC : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace schrodinger
