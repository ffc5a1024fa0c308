#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aesop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or divisibility contract violated.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Wrong color space or tensor kind for an operation.
class TypeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint belongs to a different architecture or scale.
class FingerprintError : public Error {
 public:
  using Error::Error;
};

/// A frozen model was modified, or an unfrozen model was used where a frozen
/// one is required.
class FreezeViolation : public Error {
 public:
  using Error::Error;
};

/// Dataset audit found an LR file that does not match its HR source.
class AuditError : public Error {
 public:
  using Error::Error;
};

/// Raised by training loops on non-finite losses or contract violations.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, std::int64_t step, std::string last_good)
      : Error(what), step_(step), last_good_checkpoint_(std::move(last_good)) {}

  std::int64_t step() const { return step_; }
  const std::string& last_good_checkpoint() const { return last_good_checkpoint_; }

 private:
  std::int64_t step_;
  std::string last_good_checkpoint_;
};

}  // namespace aesop
