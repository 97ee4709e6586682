#include "pairstab/error.hpp"

namespace pairstab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::malformed_file: return "malformed-file";
    case ErrorCode::domain_violation: return "domain-violation";
    case ErrorCode::certification_failure: return "certification-failure";
    case ErrorCode::absolute_continuity_violation: return "absolute-continuity-violation";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::missing_alpha: return "missing-alpha";
    case ErrorCode::invalid_delta: return "invalid-delta";
  }
  return "unknown-error";
}

}  // namespace pairstab
