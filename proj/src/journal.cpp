#include "toxmarket/journal.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "toxmarket/error.hpp"

namespace toxmarket {

namespace {

std::uint32_t checksum(std::string_view text) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size())));
}

[[noreturn]] void corrupt_at(std::uint64_t offset, const std::string& why) {
  fail(ErrorKind::corrupt, "journal corrupt at byte offset " + std::to_string(offset) + ": " + why);
}

}  // namespace

std::string encode_journal_line(const nlohmann::json& event) {
  const std::string body = event.dump();
  char prefix[10];
  std::snprintf(prefix, sizeof prefix, "%08x ", checksum(body));
  return prefix + body + '\n';
}

std::vector<JournalEntry> Journal::read(const std::filesystem::path& path,
                                        std::uint64_t* valid_bytes) {
  std::vector<JournalEntry> out;
  if (valid_bytes) *valid_bytes = 0;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open journal '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::uint64_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string_view line(data.data() + pos, nl - pos);
    if (line.size() < 10 || line[8] != ' ') corrupt_at(pos, "malformed line");
    std::uint32_t expected = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      const char c = line[i];
      std::uint32_t v;
      if (c >= '0' && c <= '9') {
        v = static_cast<std::uint32_t>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        v = static_cast<std::uint32_t>(c - 'a' + 10);
      } else {
        corrupt_at(pos, "malformed checksum");
      }
      expected = expected << 4 | v;
    }
    const std::string_view body = line.substr(9);
    if (checksum(body) != expected) corrupt_at(pos, "checksum mismatch");
    nlohmann::json event;
    try {
      event = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      corrupt_at(pos, "unparseable event");
    }
    if (!event.is_object() || !event.contains("seq") || !event["seq"].is_number_unsigned() ||
        event["seq"].get<std::uint64_t>() != out.size() + 1) {
      corrupt_at(pos, "sequence break");
    }
    out.push_back({std::move(event), pos});
    pos = nl + 1;
  }
  if (valid_bytes) *valid_bytes = pos;
  return out;
}

Journal::Journal(const std::filesystem::path& path, std::vector<JournalEntry>& existing)
    : path_(path) {
  std::uint64_t valid = 0;
  existing = read(path, &valid);
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    fail(ErrorKind::io, "cannot open journal '" + path.string() + "': " + std::strerror(errno));
  }
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fail(ErrorKind::io, "journal '" + path.string() + "' is in use by another process");
  }
  if (::ftruncate(fd_, static_cast<off_t>(valid)) != 0) {
    const int err = errno;
    ::close(fd_);
    fail(ErrorKind::io, "cannot trim journal tail: " + std::string(std::strerror(err)));
  }
  last_seq_ = existing.size();
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::append(nlohmann::json& event) {
  event["seq"] = last_seq_ + 1;
  const std::string line = encode_journal_line(event);
  if (write_hook_) write_hook_();
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::io, "journal write failed: " + std::string(std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    fail(ErrorKind::io, "journal fsync failed: " + std::string(std::strerror(errno)));
  }
  ++last_seq_;
}

}  // namespace toxmarket
