#include "toxmarket/error.hpp"

namespace toxmarket {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::unauthorized: return "unauthorized";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::rejected_record: return "rejected_record";
    case ErrorKind::io: return "io";
    case ErrorKind::corrupt: return "corrupt";
  }
  return "unknown";
}

}  // namespace toxmarket
