#pragma once

#include <string>

#include "repro/repro.h"

namespace cli {

// Thrown by Check() on a non-OK status; main maps it to exit code 1.
struct DomainError {
  repro_status status;
  std::string message;
};

inline void Check(repro_status s) {
  if (s != REPRO_OK) throw DomainError{s, repro_last_error()};
}

// Takes ownership of a string returned by the C API.
inline std::string Take(char* s) {
  if (!s) return {};
  std::string out(s);
  repro_free_string(s);
  return out;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  int threads = 8;
};

// Blocks until SIGINT/SIGTERM. Prints "listening on http://host:port" once
// bound. Returns a process exit code.
int RunServer(const repro_service* service, const ServeOptions& options);

}  // namespace cli
