#pragma once

#include <stdexcept>
#include <string>

namespace shmtwin {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The decimator requirements cannot be met; what() names the constraint.
class DesignError : public Error {
 public:
  DesignError(std::string constraint, const std::string& detail)
      : Error("design failed [" + constraint + "]: " + detail),
        constraint_(std::move(constraint)) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Malformed or inconsistent scenario file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; what() carries the stage name and the cause.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage " + stage + " failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace shmtwin
