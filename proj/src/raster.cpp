#include "rslcr/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rslcr/error.hpp"

namespace rslcr {

namespace {

std::vector<std::size_t> axis_offsets(std::size_t extent, std::size_t patch, std::size_t step) {
  const std::size_t span = extent - patch;
  const std::size_t count = (span + step - 1) / step + 1;
  std::vector<std::size_t> offsets(count);
  for (std::size_t k = 0; k + 1 < count; ++k) offsets[k] = k * step;
  offsets.back() = span;
  return offsets;
}

}  // namespace

PatchGrid grid_layout(std::size_t height, std::size_t width, std::size_t patch_size,
                      std::size_t overlap) {
  if (patch_size == 0 || overlap >= patch_size) {
    throw Error(ErrorCode::InvalidGeometry,
                "overlap " + std::to_string(overlap) + " must be smaller than patch size " +
                    std::to_string(patch_size));
  }
  if (patch_size > height || patch_size > width) {
    throw Error(ErrorCode::InvalidGeometry,
                "patch size " + std::to_string(patch_size) + " exceeds image " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  PatchGrid grid;
  grid.image_height = height;
  grid.image_width = width;
  grid.patch_size = patch_size;
  grid.overlap = overlap;
  grid.step = patch_size - overlap;
  grid.row_offsets = axis_offsets(height, patch_size, grid.step);
  grid.col_offsets = axis_offsets(width, patch_size, grid.step);
  grid.rows = grid.row_offsets.size();
  grid.cols = grid.col_offsets.size();
  return grid;
}

void extract_window(const ImageRaster& image, std::size_t top, std::size_t left,
                    std::size_t patch_size, std::span<double> out) {
  const std::size_t p = patch_size;
  const std::size_t ch = image.channels;
  if (top + p > image.height || left + p > image.width) {
    throw Error(ErrorCode::IndexOutOfBounds, "patch window leaves the image");
  }
  if (out.size() != ch * p * p) {
    throw Error(ErrorCode::DimensionMismatch, "patch buffer has wrong length");
  }
  const std::size_t area = p * p;
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t x = 0; x < p; ++x) {
      double* dst = out.data() + c * area + x * p;
      const double* src = image.data.data() + (top * image.width + left + x) * ch + c;
      const std::size_t row_stride = image.width * ch;
      for (std::size_t y = 0; y < p; ++y) dst[y] = src[y * row_stride];
    }
  }
}

PatchVector extract_patch(const ImageRaster& image, const PatchGrid& grid, GridIndex idx) {
  if (idx.row >= grid.rows || idx.col >= grid.cols) {
    throw Error(ErrorCode::IndexOutOfBounds,
                "grid index (" + std::to_string(idx.row) + ", " + std::to_string(idx.col) +
                    ") outside " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols));
  }
  if (image.height != grid.image_height || image.width != grid.image_width) {
    throw Error(ErrorCode::DimensionMismatch, "image size does not match the patch grid");
  }
  PatchVector patch;
  patch.location = idx;
  patch.values.resize(image.channels * grid.patch_area());
  const auto pos = grid.position(idx);
  extract_window(image, pos.top, pos.left, grid.patch_size, patch.values);
  return patch;
}

ImageRaster assemble(std::span<const PatchVector> patches, const PatchGrid& grid) {
  const std::size_t p = grid.patch_size;
  std::vector<const PatchVector*> ordered(grid.size(), nullptr);
  for (const auto& patch : patches) {
    if (patch.location.row >= grid.rows || patch.location.col >= grid.cols) {
      throw Error(ErrorCode::IndexOutOfBounds, "patch location outside the grid");
    }
    if (patch.values.size() != grid.patch_area()) {
      throw Error(ErrorCode::DimensionMismatch, "assemble expects single-channel patches of p*p values");
    }
    auto& slot = ordered[grid.linear(patch.location)];
    if (slot != nullptr) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate patch at (" + std::to_string(patch.location.row) + ", " +
                      std::to_string(patch.location.col) + ")");
    }
    slot = &patch;
  }
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    if (ordered[k] == nullptr) {
      const auto idx = grid.index(k);
      throw Error(ErrorCode::MissingPatch, "no patch for grid location (" + std::to_string(idx.row) +
                                               ", " + std::to_string(idx.col) + ")");
    }
  }

  // Fixed grid order keeps the floating-point sums reproducible.
  std::vector<double> sum(grid.image_height * grid.image_width, 0.0);
  std::vector<std::size_t> count(sum.size(), 0);
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    const auto pos = grid.position(grid.index(k));
    const double* values = ordered[k]->values.data();
    for (std::size_t x = 0; x < p; ++x) {
      for (std::size_t y = 0; y < p; ++y) {
        const std::size_t pixel = (pos.top + y) * grid.image_width + pos.left + x;
        sum[pixel] += values[x * p + y];
        ++count[pixel];
      }
    }
  }

  ImageRaster out(grid.image_height, grid.image_width, 1);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    out.data[i] = std::clamp(sum[i] / static_cast<double>(count[i]), 0.0, 255.0);
  }
  return out;
}

std::vector<std::size_t> coverage_counts(const PatchGrid& grid) {
  std::vector<std::size_t> count(grid.image_height * grid.image_width, 0);
  for (std::size_t top : grid.row_offsets) {
    for (std::size_t left : grid.col_offsets) {
      for (std::size_t y = 0; y < grid.patch_size; ++y) {
        for (std::size_t x = 0; x < grid.patch_size; ++x) {
          ++count[(top + y) * grid.image_width + left + x];
        }
      }
    }
  }
  return count;
}

ImageRaster to_color(const ImageRaster& image) {
  if (image.channels == 3) return image;
  if (image.channels != 1) {
    throw Error(ErrorCode::InvalidArgument, "expected a 1- or 3-channel image");
  }
  ImageRaster out(image.height, image.width, 3);
  for (std::size_t i = 0; i < image.height * image.width; ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = image.data[i];
  }
  return out;
}

ImageRaster to_grayscale(const ImageRaster& image) {
  if (image.channels == 1) return image;
  if (image.channels != 3) {
    throw Error(ErrorCode::InvalidArgument, "expected a 1- or 3-channel image");
  }
  ImageRaster out(image.height, image.width, 1);
  for (std::size_t i = 0; i < image.height * image.width; ++i) {
    out.data[i] = 0.299 * image.data[3 * i] + 0.587 * image.data[3 * i + 1] +
                  0.114 * image.data[3 * i + 2];
  }
  return out;
}

ImageRaster quantize(const ImageRaster& image) {
  ImageRaster out = image;
  for (double& v : out.data) {
    v = std::isfinite(v) ? std::round(std::clamp(v, 0.0, 255.0)) : 0.0;
  }
  return out;
}

}  // namespace rslcr
