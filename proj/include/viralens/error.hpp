#pragma once

#include <stdexcept>
#include <string>

namespace viralens {

enum class ErrorKind {
  Argument,    // caller passed something outside an operation's domain
  Validation,  // input data violates a declared invariant
  Schema,      // structured input is missing a required field/column
  Decode,      // image stream could not be decoded
  Format,      // archive/corpus file is malformed or has an unknown version
  Io,          // filesystem failure
  Compute,     // numeric evaluation is undefined for the given inputs
};

const char* to_string(ErrorKind kind) noexcept;

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

}  // namespace viralens
