#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace support {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mb-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const { return leaf.empty() ? path_.string() : (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

inline const std::string kGoldenDir = MB_GOLDEN_DIR;
inline const std::string kDataDir = MB_DATA_DIR;

// Parallel fixtures. Alignments are Pharaoh links against the English tokens.
inline const std::string kNobelEn = "Alfred Nobel invented dynamite in 1866.";
inline const std::string kNobelNl = "Alfred Nobel vond in 1866 het dynamiet uit.";
inline const std::string kNobelNlAlignment = "0-0 1-1 2-2 4-3 5-4 3-6 6-8";
inline const std::string kApplesEn = "Tom ate eight apples.";
inline const std::string kApplesIt = "Tom mangiò otto mele.";
inline const std::string kApplesItAlignment = "0-0 1-1 2-2 3-3 4-4";

}  // namespace support
