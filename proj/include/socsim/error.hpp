#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace socsim {

// Wire-visible error classes. The string forms appear verbatim in `error`
// frames, so keep them in sync with error_code_name().
enum class ErrorCode { forbidden, not_found, invalid, precondition, unknown_kind };

std::string_view error_code_name(ErrorCode code);

// Raised by every state-changing operation that rejects its input. Nothing
// is mutated when an Error escapes an operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace socsim
