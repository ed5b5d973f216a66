#pragma once

#include <stdexcept>
#include <string>

namespace ngds {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's contract (bad mode index, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Shapes or extents that do not agree with each other.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or corrupted input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Whole-file checksum mismatch.
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Degenerate numerics: zero matrices, rank deficiency, collapsed
/// projections, undefined Fisher ratios.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ngds
