#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>

#include "toxmarket/api.hpp"
#include "toxmarket/service.hpp"

namespace toxmarket::testing {

inline constexpr const char* kAdminToken = "operator-secret";
inline constexpr std::int64_t kStart = 1'700'000'000;

inline const std::string kAssetsCsv =
    "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference\n"
    "BANTRY-1,Unfinished estate,Cork,51.6801,-9.4526,25000000,LN-1\n"
    "CORK-1,Office block,Cork,51.8985,-8.4756,90000000,LN-2\n"
    "DUBLIN-1,\"Hotel, city centre\",Dublin,53.3498,-6.2603,120000000,LN-3\n"
    "SKIBB-1,Retail park,Cork,51.5500,-9.2667,40000000,LN-4\n";

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("toxmarket-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Controllable wall clock shared between a test and its services.
struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> now =
      std::make_shared<std::atomic<std::int64_t>>(kStart);

  Clock clock() const {
    auto n = now;
    return [n] { return from_epoch_seconds(n->load()); };
  }
  void advance(std::int64_t s) { *now += s; }
};

inline ServiceConfig service_config(const std::filesystem::path& journal = {}) {
  ServiceConfig c;
  c.admin_token = kAdminToken;
  c.journal_path = journal.string();
  c.session_ttl_s = 3600;
  return c;
}

inline Caller admin() { return Caller{true, {}}; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
}

}  // namespace toxmarket::testing
