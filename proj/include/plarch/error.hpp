#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plarch {

// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Too few operands (e.g. fewer than two simplex vertices, an empty vector).
class ArityError : public Error {
 public:
  using Error::Error;
};

// Invalid solver or run configuration. `field()` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Input outside a method's mathematical domain (e.g. negative data for NMF).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Geometric degeneracy: no candidate adds a new point to the simplex.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace plarch
