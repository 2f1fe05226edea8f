#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metainv {

/// Rejected argument or configuration (dimension mismatch, out-of-range code, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem with persisted data: unreadable file, bad format, inconsistent content.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatVersionError : public DataError {
 public:
  using DataError::DataError;
};

class MalformedRecordError : public DataError {
 public:
  MalformedRecordError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigMismatchError : public DataError {
 public:
  using DataError::DataError;
};

/// Raised by the optimizer when a gradient or loss stops being finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(std::size_t epoch, const std::string& what)
      : std::runtime_error("training aborted at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace metainv
