#pragma once

#include <stdexcept>
#include <string>

namespace consolidate {

/// Failure categories shared by every module. The C API maps these one-to-one
/// onto its status codes.
enum class ErrorCode {
  invalid_argument,
  domain,
  index,
  infeasible,
  capacity,
  divergence,
  quadrature,
  tolerance,
  config,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thin helpers so call sites read as `throw DomainError("...")`.
#define CONSOLIDATE_DEFINE_ERROR(Name, Code)                      \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(Code, what) {} \
  };

CONSOLIDATE_DEFINE_ERROR(DomainError, ErrorCode::domain)
CONSOLIDATE_DEFINE_ERROR(IndexError, ErrorCode::index)
CONSOLIDATE_DEFINE_ERROR(InfeasibleError, ErrorCode::infeasible)
CONSOLIDATE_DEFINE_ERROR(CapacityError, ErrorCode::capacity)
CONSOLIDATE_DEFINE_ERROR(DivergenceError, ErrorCode::divergence)
CONSOLIDATE_DEFINE_ERROR(QuadratureError, ErrorCode::quadrature)
CONSOLIDATE_DEFINE_ERROR(ToleranceError, ErrorCode::tolerance)
CONSOLIDATE_DEFINE_ERROR(ConfigError, ErrorCode::config)
CONSOLIDATE_DEFINE_ERROR(InternalError, ErrorCode::internal)

#undef CONSOLIDATE_DEFINE_ERROR

}  // namespace consolidate
