#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toxmarket::csv {

/// A logical record and the 1-based line it started on.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// Reads comma-delimited records with RFC 4180 quoting. A quoted field may
/// span physical lines. Trailing CR is stripped. Throws Error(rejected_record)
/// on an unterminated quote.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Record> next();

  /// Line on which the most recently started record began.
  std::size_t record_line() const { return start_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t start_ = 0;
};

std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace toxmarket::csv
