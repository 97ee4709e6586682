#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairstab {

enum class ErrorCode {
  invalid_parameter,
  index_out_of_range,
  io_error,
  malformed_file,
  domain_violation,
  certification_failure,
  absolute_continuity_violation,
  length_mismatch,
  config_error,
  missing_alpha,
  invalid_delta,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) unless `condition` holds.
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace pairstab
