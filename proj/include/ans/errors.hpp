#pragma once

#include <stdexcept>
#include <string>

namespace ans {

// Every failure raised by the library derives from ans::Error so callers can
// map a whole family to one exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a documented invariant
// (missing schema entries, weights not summing to one, open world border).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

class InvalidAction : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

}  // namespace ans
