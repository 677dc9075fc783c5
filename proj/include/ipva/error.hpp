#pragma once

#include <stdexcept>
#include <string>

namespace ipva {

enum class ErrorKind {
  kConfig,
  kConstraintViolation,
  kIndexOutOfRange,
  kLinearSolveFailure,
  kNonFiniteState,
  kEmptyTrajectory,
  kTooShort,
  kDivisionByZero,
  kNotConverged,
  kSingularInertia,
  kSolverStalled,
  kInfeasible,
  kDegenerateInversion,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  bool is_config_error() const {
    return kind_ == ErrorKind::kConfig ||
           kind_ == ErrorKind::kConstraintViolation;
  }

 private:
  ErrorKind kind_;
};

}  // namespace ipva
