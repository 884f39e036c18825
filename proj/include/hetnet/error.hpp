#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

enum class ErrorCode {
  kInvalidParameter,
  kDomain,
  kDegenerateGeometry,
  kThresholdRange,
  kQuadrature,
  kConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "INVALID_PARAMETER";
    case ErrorCode::kDomain: return "DOMAIN";
    case ErrorCode::kDegenerateGeometry: return "DEGENERATE_GEOMETRY";
    case ErrorCode::kThresholdRange: return "THRESHOLD_RANGE";
    case ErrorCode::kQuadrature: return "QUADRATURE";
    case ErrorCode::kConfig: return "CONFIG";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace hetnet
