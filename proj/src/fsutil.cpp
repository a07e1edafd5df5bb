#include "rslcr/fsutil.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <string>
#include <system_error>
#include <unistd.h>

#include "rslcr/error.hpp"

namespace rslcr {

namespace fs = std::filesystem;

namespace {

fs::path temp_name_for(const fs::path& target) {
  static std::atomic<unsigned> counter{0};
  auto name = target.filename().string();
  name = "." + name + ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  return target.parent_path() / name;
}

}  // namespace

AtomicFile::AtomicFile(fs::path target) : target_(std::move(target)), temp_(temp_name_for(target_)) {
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw Error(ErrorCode::IoFailure, "cannot open " + temp_.string() + " for writing");
  }
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) {
    throw Error(ErrorCode::IoFailure, "write failed for " + target_.string());
  }
  out_.close();
  std::error_code ec;
  fs::rename(temp_, target_, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot rename to " + target_.string() + ": " + ec.message());
  }
  committed_ = true;
}

void write_text_atomic(const fs::path& path, std::string_view text) {
  AtomicFile file(path);
  file.stream().write(text.data(), static_cast<std::streamsize>(text.size()));
  file.commit();
}

std::vector<fs::path> list_png_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoFailure, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

}  // namespace rslcr
