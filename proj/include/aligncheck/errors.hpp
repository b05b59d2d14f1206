#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aligncheck {

// Root of the toolkit's error hierarchy. Callers that only need a
// success/failure split can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- alignment model ---------------------------------------------------
class ValidationError : public Error {
 public:
  using Error::Error;
};
class OverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class NegativeDurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class DanglingWordIndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// --- ingest / io -------------------------------------------------------
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
class RangeError : public Error {
 public:
  using Error::Error;
};
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};
class TruncatedFileError : public Error {
 public:
  using Error::Error;
};
class RegionOutOfBoundsError : public Error {
 public:
  using Error::Error;
};

// --- stats kit ---------------------------------------------------------
class EmptyInputError : public Error {
 public:
  using Error::Error;
};
class POutOfRangeError : public Error {
 public:
  using Error::Error;
};
class BothZeroError : public Error {
 public:
  using Error::Error;
};
class RankDeficientError : public Error {
 public:
  using Error::Error;
};
class TooFewObservationsError : public Error {
 public:
  using Error::Error;
};

// --- corpus model ------------------------------------------------------
class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};
class PhoneExcludedError : public Error {
 public:
  using Error::Error;
};

// --- detectors ---------------------------------------------------------
class DurationMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace aligncheck
