#include "toxmarket/csv.hpp"

#include <sstream>

#include "toxmarket/error.hpp"

namespace toxmarket::csv {

namespace {

// Returns true when the record is complete (no open quote at end of text).
bool parse_into(std::string_view text, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(std::move(current));
  return !quoted;
}

}  // namespace

std::optional<Record> Reader::next() {
  std::string physical;
  if (!std::getline(in_, physical)) return std::nullopt;
  ++line_;
  start_ = line_;
  Record rec;
  rec.line = line_;
  if (!physical.empty() && physical.back() == '\r') physical.pop_back();
  std::string text = physical;
  while (!parse_into(text, rec.fields)) {
    if (!std::getline(in_, physical)) {
      fail(ErrorKind::rejected_record,
           "line " + std::to_string(rec.line) + ": unterminated quoted field");
    }
    ++line_;
    if (!physical.empty() && physical.back() == '\r') physical.pop_back();
    text += '\n';
    text += physical;
  }
  return rec;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  if (!parse_into(line, fields)) fail(ErrorKind::rejected_record, "unterminated quoted field");
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace toxmarket::csv
