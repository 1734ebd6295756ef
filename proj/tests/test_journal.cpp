#include <doctest.h>

#include "service_support.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/journal.hpp"

using namespace toxmarket;
using namespace toxmarket::testing;
using nlohmann::json;

TEST_CASE("journal lines carry a crc32 of the event text") {
  const json e{{"op", "credit"}, {"seq", 1}};
  const std::string line = encode_journal_line(e);
  // crc32("{\"op\":\"credit\",\"seq\":1}") computed with Python's zlib.crc32.
  CHECK(line == "1023fa05 {\"op\":\"credit\",\"seq\":1}\n");
}

TEST_CASE("appended events read back in order with contiguous seq") {
  TempDir dir;
  const auto path = dir.path() / "j.log";
  {
    std::vector<JournalEntry> existing;
    Journal j(path, existing);
    CHECK(existing.empty());
    json a{{"op", "a"}};
    json b{{"op", "b"}};
    j.append(a);
    j.append(b);
    CHECK(a["seq"] == 1);
    CHECK(b["seq"] == 2);
    CHECK(j.last_seq() == 2);
  }
  const auto entries = Journal::read(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].event["op"] == "a");
  CHECK(entries[0].offset == 0);
  CHECK(entries[1].offset == encode_journal_line(entries[0].event).size());
  std::vector<JournalEntry> existing;
  Journal reopened(path, existing);
  CHECK(existing.size() == 2);
  json c{{"op", "c"}};
  reopened.append(c);
  CHECK(c["seq"] == 3);
}

TEST_CASE("a missing journal reads as empty") {
  TempDir dir;
  CHECK(Journal::read(dir.path() / "absent.log").empty());
}

TEST_CASE("a torn final line is dropped and trimmed on open") {
  TempDir dir;
  const auto path = dir.path() / "j.log";
  const std::string good = encode_journal_line({{"op", "a"}, {"seq", 1}});
  write_file(path, good + "0badc0de {\"op\":\"b\",\"se");
  std::uint64_t valid = 0;
  CHECK(Journal::read(path, &valid).size() == 1);
  CHECK(valid == good.size());
  std::vector<JournalEntry> existing;
  {
    Journal j(path, existing);
    json b{{"op", "b"}};
    j.append(b);
  }
  CHECK(read_file(path) == good + encode_journal_line({{"op", "b"}, {"seq", 2}}));
}

TEST_CASE("damage inside the journal reports the byte offset") {
  TempDir dir;
  const auto path = dir.path() / "j.log";
  const std::string l1 = encode_journal_line({{"op", "a"}, {"seq", 1}});
  const std::string l2 = encode_journal_line({{"op", "b"}, {"seq", 2}});
  const std::string l3 = encode_journal_line({{"op", "c"}, {"seq", 3}});
  const std::string offset = std::to_string(l1.size());

  auto expect_corrupt = [&](const std::string& data, const std::string& where) {
    write_file(path, data);
    try {
      Journal::read(path);
      FAIL("expected corrupt journal");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::corrupt);
      CHECK(std::string(e.what()).find("byte offset " + where) != std::string::npos);
    }
  };

  std::string flipped = l2;
  flipped[15] = flipped[15] == 'b' ? 'x' : 'b';
  expect_corrupt(l1 + flipped + l3, offset);
  expect_corrupt(l1 + "zz" + l2.substr(2) + l3, offset);
  expect_corrupt(l1 + "garbage\n" + l3, offset);
  expect_corrupt(l1 + l3, offset);  // seq gap
  expect_corrupt(l1 + encode_journal_line(json::array({1, 2})) + l3, offset);
}

TEST_CASE("a failing write surfaces as an io error") {
  TempDir dir;
  std::vector<JournalEntry> existing;
  Journal j(dir.path() / "j.log", existing);
  j.set_write_hook([] { throw Error(ErrorKind::io, "disk full"); });
  json e{{"op", "a"}};
  CHECK_THROWS_AS(j.append(e), Error);
  CHECK(j.last_seq() == 0);
}

TEST_CASE("a second writer on the same journal is refused") {
  TempDir dir;
  std::vector<JournalEntry> existing;
  Journal first(dir.path() / "j.log", existing);
  CHECK_THROWS_AS(Journal(dir.path() / "j.log", existing), Error);
}
