#pragma once

#include <stdexcept>
#include <string>

namespace repro {

// Stable across the C boundary; values mirror repro_status in repro.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kEmptySnippetSet = 4,
  kSingleClass = 5,
  kTooFewMinority = 6,
  kConfiguration = 7,
  kNotFound = 8,
  kInternal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace repro
