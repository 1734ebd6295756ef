#pragma once

#include <stdexcept>
#include <string>

namespace toxmarket {

enum class ErrorKind {
  invalid_argument,  // malformed or out-of-range input
  unauthorized,      // missing, unknown or expired credentials
  not_found,         // unknown asset, market, account, ...
  conflict,          // state conflict: halted market, cap exceeded, duplicate
  rejected_record,   // a data record failed schema validation
  io,                // unreadable stream, unwritable journal
  corrupt,           // persisted state failed integrity checks
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so that adapters
/// (HTTP, CLI) can map it without string matching.
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

}  // namespace toxmarket
