#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabens {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class HeaderMismatch : public Error {
public:
  using Error::Error;
};

class ArityError : public Error {
public:
  ArityError(std::size_t row, std::size_t expected, std::size_t got)
      : Error("row " + std::to_string(row) + ": expected " + std::to_string(expected) +
              " cells, got " + std::to_string(got)),
        row(row) {}
  std::size_t row;
};

class ParseError : public Error {
public:
  ParseError(std::size_t row, std::string column, const std::string& text)
      : Error("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + text +
              "'"),
        row(row),
        column(std::move(column)) {}
  std::size_t row;
  std::string column;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class UnknownColumn : public Error {
public:
  explicit UnknownColumn(const std::string& name) : Error("unknown column '" + name + "'"), name(name) {}
  std::string name;
};

class TargetDropForbidden : public Error {
public:
  explicit TargetDropForbidden(const std::string& name)
      : Error("target column '" + name + "' cannot be dropped") {}
};

class TargetHasMissing : public Error {
public:
  explicit TargetHasMissing(const std::string& name)
      : Error("target column '" + name + "' has missing cells") {}
};

class UnseenCategory : public Error {
public:
  UnseenCategory(std::string column, std::string value)
      : Error("column '" + column + "': category '" + value + "' was not seen at fit time"),
        column(std::move(column)),
        value(std::move(value)) {}
  std::string column;
  std::string value;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class SingularSystem : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class LengthMismatch : public Error {
public:
  using Error::Error;
};

class DegenerateTarget : public Error {
public:
  using Error::Error;
};

class InputNotFound : public Error {
public:
  explicit InputNotFound(const std::string& path) : Error("input not found: " + path) {}
};

class PipelineError : public Error {
public:
  PipelineError(std::string step, const std::string& what)
      : Error("pipeline step '" + step + "' failed: " + what), step(std::move(step)) {}
  std::string step;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace tabens
