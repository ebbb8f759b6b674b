#pragma once

#include <stdexcept>
#include <string>

namespace mdx {

// Root of every error the library raises. The CLI maps UsageError to exit
// code 2 and everything else derived from Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// WAVE container problems.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCodecError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public Error {
 public:
  using Error::Error;
};

// Manifest or submission descriptor violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The metric has no meaningful value for this input (e.g. silent reference).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

class MissingEstimateError : public Error {
 public:
  using Error::Error;
};

class MissingSubmissionError : public Error {
 public:
  using Error::Error;
};

// One or more songs failed to score; the message lists each of them.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdx
