#pragma once

#include <stdexcept>
#include <string>

namespace stencilguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class MissingLedger : public Error {
 public:
  using Error::Error;
};

// Localization or reconstruction failed; the corrupted value stays in place.
class Uncorrectable : public Error {
 public:
  using Error::Error;
};

// The same block failed detection after a rollback.
class PersistentError : public Error {
 public:
  using Error::Error;
};

class BitOutOfRange : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stencilguard
