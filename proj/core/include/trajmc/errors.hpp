#pragma once

#include <stdexcept>
#include <string>

namespace trajmc {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Spacecraft too close to one of the primaries.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Thrust direction undefined because the primer vector vanished.
class DegenerateControlError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class FuelExhaustedError : public Error {
 public:
  using Error::Error;
};

class EventError : public Error {
 public:
  using Error::Error;
};

/// Switch with vanishing time derivative of the switching function.
class GrazingSwitchError : public Error {
 public:
  using Error::Error;
};

class CorrectionError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace trajmc
