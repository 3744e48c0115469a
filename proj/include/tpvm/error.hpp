#pragma once

#include <stdexcept>
#include <string>

namespace tpvm {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not agree (pixel counts, frame counts, viewer counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value outside its admissible range: intensities or weights outside [0,1],
// non-integer frame ratios, non-ascending profiles, bad solver settings.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// File-level failures. The kind distinguishes the codec error classes.
class IoError : public Error {
 public:
  enum class Kind {
    open_failed,
    malformed_header,
    truncated_payload,
    unsupported_format,
    bad_magic,
    version_mismatch,
    write_failed,
  };

  IoError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace tpvm
