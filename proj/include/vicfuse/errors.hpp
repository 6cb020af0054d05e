#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vicfuse {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Rotation matrix is not orthonormal with determinant +1.
class InvalidPose : public Error {
 public:
  using Error::Error;
};

// A box transform would tilt the z-axis beyond the planarity tolerance.
class NonPlanarRotation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t record, const std::string& what)
      : Error("record " + std::to_string(record) + ": " + what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class MalformedPayload : public Error {
 public:
  using Error::Error;
};

class NonFiniteCost : public Error {
 public:
  using Error::Error;
};

class NotSynchronous : public Error {
 public:
  using Error::Error;
};

class MissingAnnotations : public Error {
 public:
  using Error::Error;
};

class MissingDetections : public Error {
 public:
  using Error::Error;
};

class MissingCloud : public Error {
 public:
  using Error::Error;
};

class NonPositiveDt : public Error {
 public:
  using Error::Error;
};

class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

class OutOfTimeRange : public Error {
 public:
  using Error::Error;
};

// Scenario or bench configuration failed validation. `field` names the
// offending JSON path, e.g. "tracks[2].motion.kind".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace vicfuse
