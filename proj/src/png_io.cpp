#include <png.h>

#include <cstring>
#include <string>
#include <vector>

#include "rslcr/error.hpp"
#include "rslcr/fsutil.hpp"
#include "rslcr/raster.hpp"

namespace rslcr {

namespace {

struct PngImageGuard {
  png_image image;
  PngImageGuard() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
};

}  // namespace

ImageRaster read_png(const std::filesystem::path& path) {
  PngImageGuard guard;
  png_image& img = guard.image;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorCode::IoFailure, "cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  ImageRaster out(img.height, img.width, channels);
  for (std::size_t i = 0; i < buffer.size(); ++i) out.data[i] = buffer[i];
  return out;
}

void write_png(const ImageRaster& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::InvalidArgument, "PNG output supports 1 or 3 channels");
  }
  if (image.data.size() != image.height * image.width * image.channels || image.data.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "image buffer does not match its dimensions");
  }
  const ImageRaster q = quantize(image);
  std::vector<png_byte> pixels(q.data.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<png_byte>(q.data[i]);

  PngImageGuard guard;
  png_image& img = guard.image;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<png_byte> encoded(size);
  if (!png_image_write_to_memory(&img, encoded.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("PNG encode failed: ") + img.message);
  }
  AtomicFile file(path);
  file.stream().write(reinterpret_cast<const char*>(encoded.data()),
                      static_cast<std::streamsize>(size));
  file.commit();
}

}  // namespace rslcr
