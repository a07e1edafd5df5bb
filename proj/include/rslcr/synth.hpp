#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rslcr/model.hpp"
#include "rslcr/raster.hpp"

namespace rslcr {

enum class SynthesisMode {
  Rslcr,        // all sampled pairs, locality-constrained weights
  FastRslcr,    // only the K sampled pairs nearest to the test patch
  LleBaseline,  // all sampled pairs, lambda forced to 0
};

std::string_view mode_name(SynthesisMode mode);

struct SynthesisConfig {
  double lambda = 0.5;
  SynthesisMode mode = SynthesisMode::Rslcr;
  std::size_t neighbors = 200;  // K, used by FastRslcr
  std::size_t threads = 0;      // 0 = auto

  double effective_lambda() const { return mode == SynthesisMode::LleBaseline ? 0.0 : lambda; }
};

/// Throws InvalidArgument / KOutOfRange when the config cannot run on `model`.
void validate_config(const SynthesisConfig& cfg, const TrainedModel& model);

/// Sketch patch (p^2 values) for one raw photo patch (3p^2 values, canonical
/// order). Solver failures propagate.
std::vector<double> synthesize_patch(const ClusterModel& cluster, std::span<const double> raw_test_patch,
                                     const SynthesisConfig& cfg);

struct PatchFallback {
  GridIndex location;
  std::string reason;
};

struct SynthesisReport {
  std::size_t patches = 0;
  std::vector<PatchFallback> fallbacks;  // in grid order
};

/// Pre-assembly sketch patches for every grid location, in grid order. A
/// location whose weight system is singular gets uniform weights and a
/// logged PatchFallback instead of failing the image.
std::vector<PatchVector> synthesize_patches(const TrainedModel& model, const ImageRaster& photo,
                                            const SynthesisConfig& cfg,
                                            SynthesisReport* report = nullptr);

/// Single-channel sketch with the photo's height and width. Output is
/// identical for every thread count.
ImageRaster synthesize_image(const TrainedModel& model, const ImageRaster& photo,
                             const SynthesisConfig& cfg, SynthesisReport* report = nullptr);

}  // namespace rslcr
