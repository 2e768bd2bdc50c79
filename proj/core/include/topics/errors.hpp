#pragma once

#include <stdexcept>
#include <string>

namespace topics {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values or violated operation preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numeric guard tripped: degenerate normalization, corrupted statistics,
/// negative counts beyond tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File or stream I/O failure, including malformed binary snapshots.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed corpus input. Carries the offending 1-based line number and a
/// machine-checkable kind so callers can distinguish failure modes.
class ParseError : public Error {
 public:
  enum class Kind {
    kBadHeader,
    kBadTriple,
    kDocIdRange,
    kWordIdRange,
    kBadCount,
    kNnzMismatch,
    kVocabMismatch,
    kDuplicateWord,
  };

  ParseError(Kind kind, long line, const std::string& message)
      : Error(message), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  long line() const { return line_; }

 private:
  Kind kind_;
  long line_;
};

}  // namespace topics
