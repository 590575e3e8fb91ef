#pragma once

#include <stdexcept>
#include <string>

namespace liel {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input records (KB lines, documents, predictions).
class InputError : public Error {
 public:
  using Error::Error;
};

// Unreadable or version-mismatched index/model files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Violated configuration preconditions (sigma <= 0, odd window, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Optimizer failure, e.g. a non-finite objective during line search.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace liel
