#pragma once

#include <stdexcept>
#include <string>

namespace wgdl {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class ErrorKind {
  validation,  // bad argument / precondition violation
  config,      // run-configuration parse or consistency failure
  size_guard,  // operation refused at this problem size (oracle-scale guard)
  io,          // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wgdl
