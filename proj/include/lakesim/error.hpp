#pragma once

#include <stdexcept>
#include <string>

namespace lakesim {

enum class ErrorCode {
  invalid_argument = 1,
  grid_mismatch,
  non_finite,
  compatibility,
  not_converged,
  cfl_violation,
  io_error,
  format_error,
  config_error,
  check_failed,
};

/// Every failure raised by the library carries one of the codes above; the C
/// API maps them onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lakesim
