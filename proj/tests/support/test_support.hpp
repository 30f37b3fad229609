#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "duet/provider/provider.hpp"
#include "duet/provider/types.hpp"

namespace duet::testing {

inline std::filesystem::path fixture_dir() { return DUET_FIXTURE_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("duet-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline provider::ModelConfig mock_model(std::string id, std::int64_t budget = 4096) {
  return {id, provider::ProviderKind::Mock, id, budget};
}

/// Thread-safe event collector usable as an EventSink.
class EventLog {
 public:
  provider::EventSink sink() {
    return [this](const provider::StreamEvent& e) {
      std::lock_guard lock(mu_);
      events_.push_back(e);
    };
  }
  std::vector<provider::StreamEvent> events() const {
    std::lock_guard lock(mu_);
    return events_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<provider::StreamEvent> events_;
};

}  // namespace duet::testing
