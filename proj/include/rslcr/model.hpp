#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "rslcr/raster.hpp"

namespace rslcr {

struct PixelOffset {
  int dy = 0;
  int dx = 0;

  bool operator==(const PixelOffset&) const = default;
};

/// Shifts (dy, dx) in [-s, s]^2 around one grid location that keep the
/// shifted window inside the image, in row-major (dy, then dx) order.
struct SearchRegion {
  GridIndex center;
  std::size_t search_length = 0;
  std::vector<PixelOffset> candidate_offsets;
};

SearchRegion search_region(const PatchGrid& grid, GridIndex center, std::size_t search_length);

struct PatchSource {
  std::size_t image = 0;
  PixelOffset offset;

  bool operator==(const PatchSource&) const = default;
};

/// Raw training pairs for one grid location. Column k of `photo` and of
/// `sketch` were read at the same pixel position of training pair
/// sources[k].image.
struct SampledCluster {
  Eigen::MatrixXd photo;   // 3p^2 x n_rs
  Eigen::MatrixXf sketch;  // p^2 x n_rs
  std::vector<PatchSource> sources;
};

/// Draws n_rs (image, offset) pairs uniformly without replacement from the
/// joint pool of |offsets| * M candidates. Photos must be 3-channel and
/// sketches 1-channel.
SampledCluster sample_cluster(std::span<const ImageRaster> photos,
                              std::span<const ImageRaster> sketches, const PatchGrid& grid,
                              GridIndex location, std::size_t search_length,
                              std::size_t samples, std::mt19937_64& rng);

/// Independent random stream for one grid location; the same (seed, i, j)
/// always yields the same stream.
std::mt19937_64 cluster_rng(std::uint64_t seed, GridIndex location);

/// Uniform integer in [0, bound) with a platform-independent mapping from
/// engine output (std::uniform_int_distribution is implementation-defined).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

struct PcaFit {
  Eigen::VectorXd mean;       // m
  Eigen::MatrixXd basis;      // m x D, orthonormal columns
  Eigen::MatrixXd projected;  // D x n
  Eigen::VectorXd eigenvalues;  // full spectrum of the centered scatter, descending
  double retained_energy = 0.0;
  bool degenerate = false;
};

/// PCA of the columns of `data`. D is the smallest count whose leading
/// eigenvalues carry at least `energy` of the total. Uses the n x n Gram
/// matrix when n < m and the m x m scatter matrix otherwise. Data without
/// variance (identical columns, or a single column) is flagged degenerate and
/// gets D = 1 with the first unit vector as basis.
PcaFit fit_pca(const Eigen::MatrixXd& data, double energy);

struct ClusterModel {
  GridIndex location;
  Eigen::VectorXd pca_mean;        // 3p^2
  Eigen::MatrixXd pca_basis;       // 3p^2 x D
  Eigen::MatrixXd photo_patches;   // D x n_rs, projected
  Eigen::MatrixXf sketch_patches;  // p^2 x n_rs, pixel intensities

  std::size_t reduced_dim() const { return static_cast<std::size_t>(pca_basis.cols()); }
  std::size_t samples() const { return static_cast<std::size_t>(photo_patches.cols()); }
};

struct ModelHeader {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t patch_size = 0;
  std::uint32_t overlap = 0;
  std::uint32_t search_length = 0;
  std::uint32_t samples = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint64_t seed = 0;
  double energy = 0.0;
  std::uint32_t training_pairs = 0;

  bool operator==(const ModelHeader&) const = default;
};

struct TrainedModel {
  ModelHeader header;
  std::vector<ClusterModel> clusters;  // row-major grid order

  PatchGrid grid() const;
  const ClusterModel& cluster(GridIndex idx) const {
    return clusters.at(idx.row * header.cols + idx.col);
  }
};

struct TrainingParams {
  std::size_t patch_size = 20;
  std::size_t overlap = 14;
  std::size_t search_length = 5;
  std::size_t samples = 800;
  double energy = 0.99;
};

struct TrainingStats {
  double mean_reduced_dim = 0.0;
  double min_retained_energy = 1.0;
  std::size_t degenerate_clusters = 0;
};

/// Samples and fits every grid location. Photos may be 1- or 3-channel
/// (gray is replicated); sketches may be 1- or 3-channel (color is
/// converted to luminance). The result does not depend on `threads`.
TrainedModel train(std::span<const ImageRaster> photos, std::span<const ImageRaster> sketches,
                   const TrainingParams& params, std::uint64_t seed, std::size_t threads = 0,
                   TrainingStats* stats = nullptr);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace rslcr
