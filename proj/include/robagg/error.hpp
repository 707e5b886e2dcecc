#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace robagg {

// Bad input: out-of-range probabilities, malformed records, impossible
// configurations. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed an internal consistency check (a root was not
// bracketed, a reconstruction residual exceeded its bound). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ServiceErrorKind { kAuth, kRateLimit, kMalformed, kTransport };

// Failure talking to an external completion service. Exit code 4.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ServiceErrorKind kind() const { return kind_; }

 private:
  ServiceErrorKind kind_;
};

// Answer text could not be mapped to a decision; keeps the text for audit.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string text)
      : std::runtime_error(what), text_(std::move(text)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

}  // namespace robagg
