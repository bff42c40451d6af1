#pragma once

#include <stdexcept>
#include <string>

namespace bbvp {

enum class ErrorKind {
  BadInput,
  GridLine,
  EndpointOnGridLine,
  BoundViolation,
  PreconditionViolated,
  NotConverged,
  MonotonicityLost,
  StuckAtBoundary,
};

const char* to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type.
/// The kind drives the CLI exit code; the message names what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Damped iteration ran out of budget. Carries the last measured residual.
class NotConverged : public Error {
 public:
  NotConverged(int iterations, double residual, const std::string& detail);

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace bbvp
