#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rslcr/model.hpp"
#include "rslcr/raster.hpp"
#include "rslcr/synth.hpp"

namespace rslcr {

// ---------------------------------------------------------------- SSIM

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(const SsimParams& params);

/// Mean SSIM over every window position fully inside both images (no
/// padding). Inputs must be single-channel and equally sized.
double ssim(const ImageRaster& a, const ImageRaster& b, const SsimParams& params = {});

struct SsimRow {
  std::string file;
  double score = 0.0;
};

struct SsimTable {
  std::vector<SsimRow> rows;  // sorted by file name
  double mean = 0.0;

  /// "file,ssim" header, one row per file, then a "mean" row.
  std::string to_csv() const;
};

/// Scores each PNG in `test_dir` against the same-named PNG in `ref_dir`.
/// Color images are converted to luminance. Any file without a partner is an
/// UnpairedFile error.
SsimTable eval_directory(const std::filesystem::path& ref_dir,
                         const std::filesystem::path& test_dir, const SsimParams& params = {});

// ---------------------------------------------------------------- bench

struct NamedImage {
  std::string name;
  ImageRaster image;
};

struct BenchSample {
  std::string file;
  std::size_t repetition = 0;
  double seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchSample> samples;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  double stddev_seconds = 0.0;
  ModelHeader model;
  SynthesisConfig config;
  std::string machine;
  bool outputs_identical = true;  // every repetition produced the same sketch

  std::size_t count() const { return samples.size(); }
  std::string to_csv() const;
  std::string to_text() const;
};

std::vector<NamedImage> load_images(const std::filesystem::path& file_or_dir);

/// Times synthesize_image for each input `repetitions` times on one thread.
/// Decoding and model loading are outside the timed region.
BenchReport bench_synthesis(const TrainedModel& model, std::span<const NamedImage> inputs,
                            const SynthesisConfig& cfg, std::size_t repetitions);

std::string machine_descriptor();

// ---------------------------------------------------------------- dataset

/// Smooth color "photo" number `index` of the dataset `seed`: a sum of
/// low-frequency cosine fields per channel, squashed into [0, 255] and rounded
/// to 8-bit values. Fields shared by the whole dataset are shifted by a few
/// pixels and jittered per photo; each photo also gets weaker fields of its own.
ImageRaster synthetic_photo(std::size_t height, std::size_t width, std::uint64_t seed,
                            std::size_t index);

/// Deterministic photo -> sketch mapping: luminance, 3x3 Sobel gradient
/// magnitude (edge-replicated borders), inverted onto white and rounded.
ImageRaster sketch_from_photo(const ImageRaster& photo);

/// Writes `count` pairs as NNNN.png into the two directories (created if
/// needed). Pair k is synthetic_pair(height, width, seed, k).
void gen_synthetic(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                   const std::filesystem::path& photo_dir, const std::filesystem::path& sketch_dir);

/// In-memory form of gen_synthetic's pair k.
std::pair<ImageRaster, ImageRaster> synthetic_pair(std::size_t height, std::size_t width,
                                                   std::uint64_t seed, std::size_t index);

std::string synthetic_name(std::size_t index);

}  // namespace rslcr
