#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corpusforge {

// Failure categories shared by every module; the HTTP layer maps them onto
// status codes.
enum class ErrorKind {
  input,
  configuration,
  auth,
  permission,
  conflict,
  not_found,
  integrity,
  range,
  training,
  environment,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace corpusforge
