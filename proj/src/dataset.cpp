#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "rslcr/error.hpp"
#include "rslcr/eval.hpp"

namespace rslcr {

namespace {

// Every photo shares a dataset-wide template (like aligned faces sharing a
// layout) that is shifted and jittered per image, plus a few weaker
// components of its own.
constexpr int kSharedComponents = 6;
constexpr int kOwnComponents = 3;
constexpr double kMaxCycles = 2.5;  // per image side
constexpr double kSharedAmplitude = 60.0;
constexpr double kOwnAmplitude = 20.0;
constexpr double kAmplitudeJitter = 0.25;
constexpr double kPhaseJitter = 0.4;
constexpr int kMaxShift = 3;  // pixels
constexpr double kSquash = 90.0;
constexpr double kEdgeGain = 1.5;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ImageRaster synthetic_photo(std::size_t height, std::size_t width, std::uint64_t seed,
                            std::size_t index) {
  if (height == 0 || width == 0) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  struct Wave {
    double fy, fx, phase;
    double amp[3];
  };
  auto random_wave = [](std::mt19937_64& rng, double amplitude) {
    Wave wv{};
    wv.fy = (2.0 * unit(rng) - 1.0) * kMaxCycles;
    wv.fx = (2.0 * unit(rng) - 1.0) * kMaxCycles;
    wv.phase = 2.0 * std::numbers::pi * unit(rng);
    for (double& a : wv.amp) a = (2.0 * unit(rng) - 1.0) * amplitude;
    return wv;
  };

  std::mt19937_64 shared_rng(mix(seed));
  std::mt19937_64 own_rng(mix(seed ^ mix(index + 1)));
  std::vector<Wave> waves;
  for (int k = 0; k < kSharedComponents; ++k) waves.push_back(random_wave(shared_rng, kSharedAmplitude));
  for (auto& wv : waves) {
    const double scale = 1.0 + kAmplitudeJitter * (2.0 * unit(own_rng) - 1.0);
    for (double& a : wv.amp) a *= scale;
    wv.phase += kPhaseJitter * (2.0 * unit(own_rng) - 1.0);
  }
  const auto span = static_cast<std::uint64_t>(2 * kMaxShift + 1);
  const double shift_y = static_cast<double>(own_rng() % span) - kMaxShift;
  const double shift_x = static_cast<double>(own_rng() % span) - kMaxShift;
  for (int k = 0; k < kOwnComponents; ++k) waves.push_back(random_wave(own_rng, kOwnAmplitude));

  ImageRaster photo(height, width, 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double v[3] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < waves.size(); ++k) {
        const auto& wv = waves[k];
        const bool shared = k < static_cast<std::size_t>(kSharedComponents);
        const double yy = static_cast<double>(y) - (shared ? shift_y : 0.0);
        const double xx = static_cast<double>(x) - (shared ? shift_x : 0.0);
        const double arg = 2.0 * std::numbers::pi *
                               (wv.fy * yy / static_cast<double>(height) +
                                wv.fx * xx / static_cast<double>(width)) +
                           wv.phase;
        const double c = std::cos(arg);
        for (int ch = 0; ch < 3; ++ch) v[ch] += wv.amp[ch] * c;
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        photo.at(y, x, ch) = std::round(127.5 + 127.5 * std::tanh(v[ch] / kSquash));
      }
    }
  }
  return photo;
}

ImageRaster sketch_from_photo(const ImageRaster& photo) {
  const ImageRaster gray = to_grayscale(photo);
  const std::size_t h = gray.height;
  const std::size_t w = gray.width;
  auto px = [&](long y, long x) {
    y = std::clamp<long>(y, 0, static_cast<long>(h) - 1);
    x = std::clamp<long>(x, 0, static_cast<long>(w) - 1);
    return gray.data[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  ImageRaster sketch(h, w, 1);
  for (long y = 0; y < static_cast<long>(h); ++y) {
    for (long x = 0; x < static_cast<long>(w); ++x) {
      const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      const double magnitude = std::sqrt(gx * gx + gy * gy);
      sketch.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          std::round(std::clamp(255.0 - kEdgeGain * magnitude, 0.0, 255.0));
    }
  }
  return sketch;
}

std::string synthetic_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu.png", index);
  return buf;
}

std::pair<ImageRaster, ImageRaster> synthetic_pair(std::size_t height, std::size_t width,
                                                   std::uint64_t seed, std::size_t index) {
  ImageRaster photo = synthetic_photo(height, width, seed, index);
  ImageRaster sketch = sketch_from_photo(photo);
  return {std::move(photo), std::move(sketch)};
}

void gen_synthetic(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                   const std::filesystem::path& photo_dir, const std::filesystem::path& sketch_dir) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(photo_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + photo_dir.string());
  std::filesystem::create_directories(sketch_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + sketch_dir.string());
  for (std::size_t k = 0; k < count; ++k) {
    const auto [photo, sketch] = synthetic_pair(height, width, seed, k);
    write_png(photo, photo_dir / synthetic_name(k));
    write_png(sketch, sketch_dir / synthetic_name(k));
  }
}

}  // namespace rslcr
