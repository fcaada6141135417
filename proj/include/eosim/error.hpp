#pragma once

#include <stdexcept>
#include <string>

namespace eosim {

/// Failure categories shared by the C++ core and the C API error codes.
enum class ErrorKind {
  InvalidArgument,
  Io,
  MalformedHeader,
  ValueOutOfRange,
  FrameLengthMismatch,
  BadNumber,
  Config,
  Mismatch,
  Unsupported,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eosim
