#include "bbvp/error.hpp"

#include <sstream>

namespace bbvp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::GridLine: return "GridLine";
    case ErrorKind::EndpointOnGridLine: return "EndpointOnGridLine";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::MonotonicityLost: return "MonotonicityLost";
    case ErrorKind::StuckAtBoundary: return "StuckAtBoundary";
  }
  return "Unknown";
}

namespace {

std::string not_converged_message(int iterations, double residual,
                                  const std::string& detail) {
  std::ostringstream os;
  os << "fixed-point iteration did not converge after " << iterations
     << " iterations (last residual " << residual << ")";
  if (!detail.empty()) os << ": " << detail;
  os << "; try a smaller damping factor or a finer m schedule";
  return os.str();
}

}  // namespace

NotConverged::NotConverged(int iterations, double residual,
                           const std::string& detail)
    : Error(ErrorKind::NotConverged,
            not_converged_message(iterations, residual, detail)),
      iterations_(iterations),
      residual_(residual) {}

}  // namespace bbvp
