#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace manquant {

// Base of everything the library throws on bad input or failed computation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an out-of-domain parameter (dimension, count, delta, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input file or byte stream does not follow the expected layout.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// File missing or unreadable.
class IoError : public Error {
 public:
  using Error::Error;
};

// A requested computation was refused or could not produce a result
// (oracle cost guard, degenerate rate fit).
class ComputeError : public Error {
 public:
  using Error::Error;
};

}  // namespace manquant
