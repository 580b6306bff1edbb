#include "viralens/error.hpp"

namespace viralens {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Decode: return "decode";
    case ErrorKind::Format: return "format";
    case ErrorKind::Io: return "io";
    case ErrorKind::Compute: return "compute";
  }
  return "unknown";
}

}  // namespace viralens
