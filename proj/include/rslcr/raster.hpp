#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace rslcr {

/// Real-valued image, row-major pixels with interleaved channels:
/// data[(y * width + x) * channels + c]. Intensities live in [0, 255].
struct ImageRaster {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  ImageRaster() = default;
  ImageRaster(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  double& at(std::size_t y, std::size_t x, std::size_t c = 0) {
    return data[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data[(y * width + x) * channels + c];
  }

  bool operator==(const ImageRaster&) const = default;
};

struct GridIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const GridIndex&) const = default;
};

struct PixelPosition {
  std::size_t top = 0;
  std::size_t left = 0;
};

/// Layout of overlapping p x p windows. Interior offsets are multiples of
/// the step; the last offset in each dimension is clamped to dim - p.
struct PatchGrid {
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::size_t patch_size = 0;
  std::size_t overlap = 0;
  std::size_t step = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_offsets;

  std::size_t size() const { return rows * cols; }
  std::size_t linear(GridIndex idx) const { return idx.row * cols + idx.col; }
  GridIndex index(std::size_t linear_index) const {
    return {linear_index / cols, linear_index % cols};
  }
  PixelPosition position(GridIndex idx) const {
    return {row_offsets.at(idx.row), col_offsets.at(idx.col)};
  }
  std::size_t patch_area() const { return patch_size * patch_size; }
};

/// A vectorized patch. Order is channel-major, then column-major inside the
/// window: values[c * p * p + col * p + row].
struct PatchVector {
  std::vector<double> values;
  GridIndex location;
};

PatchGrid grid_layout(std::size_t height, std::size_t width, std::size_t patch_size,
                      std::size_t overlap);

/// Vectorizes the p x p window whose top-left corner is (top, left) into
/// `out` (length channels * p * p). No grid involved; used by training to
/// read shifted windows inside a search region.
void extract_window(const ImageRaster& image, std::size_t top, std::size_t left,
                    std::size_t patch_size, std::span<double> out);

PatchVector extract_patch(const ImageRaster& image, const PatchGrid& grid, GridIndex idx);

/// Overlap-averages single-channel patches into a height x width image.
/// Every grid location must be present exactly once (any order).
ImageRaster assemble(std::span<const PatchVector> patches, const PatchGrid& grid);

/// Number of patches covering each pixel, row-major.
std::vector<std::size_t> coverage_counts(const PatchGrid& grid);

ImageRaster to_color(const ImageRaster& image);
ImageRaster to_grayscale(const ImageRaster& image);

/// Loads 8/16-bit gray, gray+alpha, RGB or RGBA PNG; alpha is dropped and
/// 16-bit samples are reduced to 8 bits.
ImageRaster read_png(const std::filesystem::path& path);

/// Writes 8-bit gray (1 channel) or RGB (3 channels). Values are rounded and
/// clamped to [0, 255]. The file appears atomically.
void write_png(const ImageRaster& image, const std::filesystem::path& path);

/// Rounds every sample to the 8-bit value write_png would store.
ImageRaster quantize(const ImageRaster& image);

}  // namespace rslcr
