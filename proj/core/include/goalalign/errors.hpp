#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace goalalign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PDDL or plan text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(format(msg, line, column)), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
    if (line == 0) return msg;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + msg;
  }
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed PDDL using a feature outside :strips + :typing.
class UnsupportedConstruct : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A plan step that names no ground action.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& msg, std::size_t line) : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Grounding cap, node budget or time budget exceeded. Never means "unsolvable".
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A HAGL instance that violates its own definition (e.g. inapplicable human plan).
class InstanceError : public Error {
 public:
  using Error::Error;
};

}  // namespace goalalign
