#include "rslcr/model.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <string>

#include "rslcr/error.hpp"
#include "rslcr/parallel.hpp"

namespace rslcr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string location_string(GridIndex idx) {
  return "(" + std::to_string(idx.row) + ", " + std::to_string(idx.col) + ")";
}

}  // namespace

SearchRegion search_region(const PatchGrid& grid, GridIndex center, std::size_t search_length) {
  const auto pos = grid.position(center);
  const long s = static_cast<long>(search_length);
  const long max_top = static_cast<long>(grid.image_height - grid.patch_size);
  const long max_left = static_cast<long>(grid.image_width - grid.patch_size);
  SearchRegion region{center, search_length, {}};
  for (long dy = -s; dy <= s; ++dy) {
    const long top = static_cast<long>(pos.top) + dy;
    if (top < 0 || top > max_top) continue;
    for (long dx = -s; dx <= s; ++dx) {
      const long left = static_cast<long>(pos.left) + dx;
      if (left < 0 || left > max_left) continue;
      region.candidate_offsets.push_back({static_cast<int>(dy), static_cast<int>(dx)});
    }
  }
  return region;
}

std::mt19937_64 cluster_rng(std::uint64_t seed, GridIndex location) {
  const std::uint64_t cell = (static_cast<std::uint64_t>(location.row) << 32) ^
                             static_cast<std::uint64_t>(location.col);
  return std::mt19937_64(splitmix64(seed ^ splitmix64(cell)));
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform_below needs a positive bound");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

SampledCluster sample_cluster(std::span<const ImageRaster> photos,
                              std::span<const ImageRaster> sketches, const PatchGrid& grid,
                              GridIndex location, std::size_t search_length, std::size_t samples,
                              std::mt19937_64& rng) {
  if (photos.empty() || photos.size() != sketches.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need equally many photos and sketches (at least one)");
  }
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  for (std::size_t m = 0; m < photos.size(); ++m) {
    const auto& ph = photos[m];
    const auto& sk = sketches[m];
    if (ph.channels != 3 || sk.channels != 1 || ph.height != grid.image_height ||
        ph.width != grid.image_width || sk.height != grid.image_height ||
        sk.width != grid.image_width) {
      throw Error(ErrorCode::DimensionMismatch,
                  "training pair " + std::to_string(m) + " does not match the grid geometry");
    }
  }

  const auto region = search_region(grid, location, search_length);
  const std::size_t offsets = region.candidate_offsets.size();
  const std::size_t pool = offsets * photos.size();
  if (pool < samples) {
    throw Error(ErrorCode::InsufficientCandidates,
                "location " + location_string(location) + " has " + std::to_string(pool) +
                    " candidate pairs, " + std::to_string(samples) + " requested");
  }

  // Partial Fisher-Yates over the flattened (image, offset) pool.
  std::vector<std::uint32_t> order(pool);
  std::iota(order.begin(), order.end(), 0U);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t pick = k + uniform_below(rng, pool - k);
    std::swap(order[k], order[pick]);
  }

  const std::size_t p = grid.patch_size;
  const auto base = grid.position(location);
  SampledCluster out;
  out.photo.resize(static_cast<Eigen::Index>(3 * p * p), static_cast<Eigen::Index>(samples));
  out.sketch.resize(static_cast<Eigen::Index>(p * p), static_cast<Eigen::Index>(samples));
  out.sources.reserve(samples);
  std::vector<double> sketch_buffer(p * p);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t image = order[k] / offsets;
    const PixelOffset offset = region.candidate_offsets[order[k] % offsets];
    const auto top = static_cast<std::size_t>(static_cast<long>(base.top) + offset.dy);
    const auto left = static_cast<std::size_t>(static_cast<long>(base.left) + offset.dx);
    const auto col = static_cast<Eigen::Index>(k);
    extract_window(photos[image], top, left, p,
                   std::span<double>(out.photo.col(col).data(), 3 * p * p));
    extract_window(sketches[image], top, left, p, sketch_buffer);
    for (std::size_t r = 0; r < p * p; ++r) {
      out.sketch(static_cast<Eigen::Index>(r), col) = static_cast<float>(sketch_buffer[r]);
    }
    out.sources.push_back({image, offset});
  }
  return out;
}

PatchGrid TrainedModel::grid() const {
  return grid_layout(header.height, header.width, header.patch_size, header.overlap);
}

TrainedModel train(std::span<const ImageRaster> photos, std::span<const ImageRaster> sketches,
                   const TrainingParams& params, std::uint64_t seed, std::size_t threads,
                   TrainingStats* stats) {
  if (photos.empty()) throw Error(ErrorCode::InvalidArgument, "no training pairs");
  if (photos.size() != sketches.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(photos.size()) + " photos but " + std::to_string(sketches.size()) +
                    " sketches");
  }
  if (!(params.energy > 0.0 && params.energy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "energy must lie in (0, 1]");
  }
  if (params.samples == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");

  const std::size_t height = photos.front().height;
  const std::size_t width = photos.front().width;
  std::vector<ImageRaster> color;
  std::vector<ImageRaster> gray;
  color.reserve(photos.size());
  gray.reserve(sketches.size());
  for (std::size_t m = 0; m < photos.size(); ++m) {
    for (const ImageRaster* img : {&photos[m], &sketches[m]}) {
      if (img->height != height || img->width != width) {
        throw Error(ErrorCode::DimensionMismatch,
                    "training pair " + std::to_string(m) + " is " + std::to_string(img->height) +
                        "x" + std::to_string(img->width) + ", expected " +
                        std::to_string(height) + "x" + std::to_string(width));
      }
    }
    color.push_back(to_color(photos[m]));
    gray.push_back(to_grayscale(sketches[m]));
  }

  const PatchGrid grid = grid_layout(height, width, params.patch_size, params.overlap);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto idx = grid.index(k);
    const std::size_t pool =
        search_region(grid, idx, params.search_length).candidate_offsets.size() * photos.size();
    if (pool < params.samples) {
      throw Error(ErrorCode::InsufficientCandidates,
                  "location " + location_string(idx) + " has " + std::to_string(pool) +
                      " candidate pairs, " + std::to_string(params.samples) + " requested");
    }
  }

  TrainedModel model;
  model.header = ModelHeader{static_cast<std::uint32_t>(height),
                             static_cast<std::uint32_t>(width),
                             static_cast<std::uint32_t>(params.patch_size),
                             static_cast<std::uint32_t>(params.overlap),
                             static_cast<std::uint32_t>(params.search_length),
                             static_cast<std::uint32_t>(params.samples),
                             static_cast<std::uint32_t>(grid.rows),
                             static_cast<std::uint32_t>(grid.cols),
                             seed,
                             params.energy,
                             static_cast<std::uint32_t>(photos.size())};
  model.clusters.resize(grid.size());
  std::vector<double> retained(grid.size(), 1.0);
  std::vector<char> degenerate(grid.size(), 0);

  parallel_for(grid.size(), threads, [&](std::size_t k) {
    const auto idx = grid.index(k);
    auto rng = cluster_rng(seed, idx);
    auto sampled = sample_cluster(color, gray, grid, idx, params.search_length, params.samples, rng);
    auto pca = fit_pca(sampled.photo, params.energy);
    if (pca.degenerate && params.samples > 1) {
      spdlog::warn("cluster {}: sampled photo patches are identical; using a unit basis",
                   location_string(idx));
    } else if (pca.retained_energy < params.energy - 1e-12) {
      throw Error(ErrorCode::DegenerateData,
                  "cluster " + location_string(idx) + " retained only " +
                      std::to_string(pca.retained_energy) + " of the variance");
    }
    auto& cluster = model.clusters[k];
    cluster.location = idx;
    cluster.pca_mean = std::move(pca.mean);
    cluster.pca_basis = std::move(pca.basis);
    cluster.photo_patches = std::move(pca.projected);
    cluster.sketch_patches = std::move(sampled.sketch);
    retained[k] = pca.retained_energy;
    degenerate[k] = pca.degenerate ? 1 : 0;
  });

  if (stats != nullptr) {
    double dims = 0.0;
    for (const auto& c : model.clusters) dims += static_cast<double>(c.reduced_dim());
    stats->mean_reduced_dim = dims / static_cast<double>(model.clusters.size());
    stats->min_retained_energy = *std::min_element(retained.begin(), retained.end());
    stats->degenerate_clusters =
        static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  }
  return model;
}

}  // namespace rslcr
