#pragma once

#include <stdexcept>
#include <string>

namespace lyap {

/// Malformed arguments: wrong dimensions, out-of-range parameters, non-finite data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation was refused because it would exceed a fixed size budget
/// (word enumeration, exterior-power dimension, scale overflow).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical precondition of a probe did not hold (distance gate,
/// budget inequality, proximity hypothesis). Distinct from software failure.
class GateError : public std::runtime_error {
 public:
  GateError(std::string reason, const std::string& detail)
      : std::runtime_error(reason + ": " + detail), reason_(std::move(reason)) {}

  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

}  // namespace lyap
