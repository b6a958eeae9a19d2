#include "corpusforge/error.hpp"

namespace corpusforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::auth: return "auth";
    case ErrorKind::permission: return "permission";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::range: return "range";
    case ErrorKind::training: return "training";
    case ErrorKind::environment: return "environment";
  }
  return "unknown";
}

}  // namespace corpusforge
