#pragma once

#include <stdexcept>
#include <string>

namespace pretrec {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, ranges, or option values supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a structural requirement (asymmetric adjacency, negative values, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-finite values during training or gradient checking.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Embedding/report files whose header or rows do not match their declared shape.
class FormatError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pretrec
