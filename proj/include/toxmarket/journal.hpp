#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace toxmarket {

/// One journaled event and where its line starts in the file.
struct JournalEntry {
  nlohmann::json event;
  std::uint64_t offset = 0;
};

/// Append-only event log. Each line is `<crc32 as 8 hex digits> <json>\n`,
/// the checksum covering the JSON text. Events carry a 1-based "seq" field
/// that must be contiguous.
class Journal {
 public:
  /// Reads and validates every complete line. A final line without its
  /// newline is a torn write and is dropped (it was never acknowledged).
  /// Any other damage throws ErrorKind::corrupt naming the byte offset.
  static std::vector<JournalEntry> read(const std::filesystem::path& path,
                                        std::uint64_t* valid_bytes = nullptr);

  /// Opens for appending after validating; a torn tail is truncated away.
  /// Holds an exclusive lock on the file so a second writer fails with io.
  /// `existing` receives the events already in the file.
  Journal(const std::filesystem::path& path, std::vector<JournalEntry>& existing);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Stamps the next seq into the event, writes the line and fsyncs.
  /// Throws ErrorKind::io on failure.
  void append(nlohmann::json& event);

  std::uint64_t last_seq() const { return last_seq_; }
  const std::filesystem::path& path() const { return path_; }

  /// Test seam run before every write; throwing simulates a failed disk.
  void set_write_hook(std::function<void()> hook) { write_hook_ = std::move(hook); }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t last_seq_ = 0;
  std::function<void()> write_hook_;
};

/// The exact line (including newline) written for an event.
std::string encode_journal_line(const nlohmann::json& event);

}  // namespace toxmarket
