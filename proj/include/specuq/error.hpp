#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace specuq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A malformed input line. Line numbers are 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Transport or endpoint failure, raised after retries are exhausted. The CLI
// maps this to exit code 2.
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, std::string pair_key)
      : Error(what), pair_key_(std::move(pair_key)) {}

  const std::string& pair_key() const noexcept { return pair_key_; }

 private:
  std::string pair_key_;
};

// The endpoint answered, but not with a well-formed classification.
class ProtocolError : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace specuq
