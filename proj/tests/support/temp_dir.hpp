#pragma once

// Self-deleting scratch directory for tests that touch the filesystem.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

namespace firescan::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<unsigned> serial{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("firescan_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(serial++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace firescan::testing
