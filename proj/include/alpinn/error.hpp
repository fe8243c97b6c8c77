#pragma once

#include <stdexcept>
#include <string>

namespace alpinn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArchitecture : public Error {
 public:
  using Error::Error;
};

/// Dimension or length mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InvalidResolution : public Error {
 public:
  using Error::Error;
};

class EmptyGeometry : public Error {
 public:
  using Error::Error;
};

class EmptySurface : public Error {
 public:
  using Error::Error;
};

class MaterialError : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Error measure with a vanishing denominator.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite objective.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, long epoch) : Error(what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

/// Invalid run configuration; names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alpinn
