#pragma once

#include <stdexcept>
#include <string>

namespace quicfl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (p not in (0,1], m < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Array shapes do not agree with the configuration they claim to describe.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A scalar input lies outside the range an operation accepts.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed (e.g. a probability far outside [0, 1]).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kMalformed,
  kVersion,
  kChecksum,
  kMismatch,
};

/// Raised while parsing table files, wire messages and vector files.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

}  // namespace quicfl
