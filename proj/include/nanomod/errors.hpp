#pragma once

#include <stdexcept>
#include <string>

namespace nanomod {

/// Base for every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A value breaks a documented bound. Names the offending field.
class InvariantError : public Error {
 public:
  InvariantError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Inputs are well formed but cannot be used together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Pipeline artifacts that do not belong together.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace nanomod
