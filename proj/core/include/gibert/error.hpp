#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gibert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix shapes do not agree with an operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration (model, training, or run settings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset, checkpoint, or resource content that cannot be used.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values surfaced during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gibert
