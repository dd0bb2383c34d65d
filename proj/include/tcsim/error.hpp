#pragma once

#include <stdexcept>
#include <string>

namespace tcsim {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Numeric = 3,
  Unreachable = 4,
  Io = 5,
};

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

/// Re-throws `e` with a "<stage>: " prefix, keeping its category.
[[noreturn]] inline void rethrow_with_stage(const std::string& stage, const Error& e) {
  throw Error(e.code(), stage + ": " + e.what());
}

}  // namespace tcsim
