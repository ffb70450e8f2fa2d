#pragma once

#include <stdexcept>
#include <string>

namespace absorb {

// Error categories double as process exit statuses and C API status codes.
enum class ErrorCode : int {
  usage = 1,
  data = 2,
  io = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorCode::usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorCode::data, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorCode::io, msg); }

}  // namespace absorb
