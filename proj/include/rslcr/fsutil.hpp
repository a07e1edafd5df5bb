#pragma once

#include <filesystem>
#include <fstream>
#include <string_view>
#include <vector>

namespace rslcr {

/// Output file that only appears under its final name after commit().
/// Destroying an uncommitted AtomicFile removes the temporary.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  ~AtomicFile();

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_text_atomic(const std::filesystem::path& path, std::string_view text);

/// Regular files with a .png extension (case-insensitive), sorted by name.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace rslcr
