#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evfilter {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input line is not valid JSON.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Valid JSON but a required field is missing or has the wrong type.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Event older than the window start.
class StaleEvent : public Error {
 public:
  using Error::Error;
};

// A window (or sample set) that cannot be trained on: one class only or too
// few samples. Always handled as a skip by the pipeline.
class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace evfilter
