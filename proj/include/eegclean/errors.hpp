#pragma once

#include <stdexcept>
#include <string>

namespace eegclean {

// Every failure raised by the library derives from Error so callers can catch
// one type; the subclasses name the contract that was violated.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty, non-finite or otherwise malformed segment.
class InvalidSegmentError : public Error {
 public:
  using Error::Error;
};

// An operation needs non-zero RMS and did not get it.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// Dimension / length / axis mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or incompatible configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad magic, version or header in a binary file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Manifest disagrees with the payload it describes.
class ManifestError : public Error {
 public:
  using Error::Error;
};

// Object used out of order (e.g. stale forward cache).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eegclean
