#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fagp {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (shape mismatch, bad argument, misuse of an API).
class UsageError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public UsageError {
 public:
  using UsageError::UsageError;
};

// A factorization failed or a computation produced non-finite values.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::ptrdiff_t pivot = -1)
      : Error(what), pivot_(pivot) {}

  // Index of the failing pivot for factorization failures, -1 otherwise.
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

// Requested problem exceeds the configured memory budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::uint64_t feature_count, std::uint64_t bytes)
      : Error(what), feature_count_(feature_count), bytes_(bytes) {}

  std::uint64_t feature_count() const noexcept { return feature_count_; }
  std::uint64_t estimated_bytes() const noexcept { return bytes_; }

 private:
  std::uint64_t feature_count_;
  std::uint64_t bytes_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fagp
