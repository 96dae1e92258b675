#include "consolidate/error.hpp"

namespace consolidate {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::index: return "index error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::capacity: return "capacity exceeded";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::quadrature: return "quadrature failure";
    case ErrorCode::tolerance: return "tolerance not reached";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

}  // namespace consolidate
