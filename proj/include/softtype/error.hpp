#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softtype {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MalformedConstraint : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// A log-space input that is not a log-probability, or a probability outside [0,1].
class DomainError : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class TrainingDiverged : public Error {
public:
  using Error::Error;
};

// Parse failures in the constraint DSL and the toy language carry a 1-based location.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace softtype

namespace softtype {

// Program is rejected by the toy type rules or references an unknown name.
class TypeCheckError : public ParseError {
public:
  using ParseError::ParseError;
};

}  // namespace softtype
