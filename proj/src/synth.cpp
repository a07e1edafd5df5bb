#include "rslcr/synth.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "rslcr/error.hpp"
#include "rslcr/kernels.hpp"
#include "rslcr/parallel.hpp"
#include "rslcr/solver.hpp"

namespace rslcr {

namespace {

std::string location_string(GridIndex idx) {
  return "(" + std::to_string(idx.row) + ", " + std::to_string(idx.col) + ")";
}

// Shared body of synthesize_patch. When `fallback_reason` is non-null a
// singular or non-finite solve degrades to uniform weights and the reason is
// stored there; otherwise the solver error propagates.
std::vector<double> reconstruct(const ClusterModel& cluster, std::span<const double> raw,
                                const SynthesisConfig& cfg, std::string* fallback_reason) {
  const auto& ks = kernels::active();
  const std::size_t photo_dim = static_cast<std::size_t>(cluster.pca_mean.size());
  const std::size_t dims = cluster.reduced_dim();
  const std::size_t n = cluster.samples();
  const std::size_t sketch_dim = static_cast<std::size_t>(cluster.sketch_patches.rows());
  if (raw.size() != photo_dim) {
    throw Error(ErrorCode::DimensionMismatch, "test patch has length " + std::to_string(raw.size()) +
                                                  ", cluster expects " + std::to_string(photo_dim));
  }
  if (static_cast<std::size_t>(cluster.pca_basis.rows()) != photo_dim ||
      static_cast<std::size_t>(cluster.photo_patches.rows()) != dims ||
      static_cast<std::size_t>(cluster.sketch_patches.cols()) != n || n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "cluster matrices are inconsistent");
  }

  Eigen::VectorXd centered(static_cast<Eigen::Index>(photo_dim));
  for (std::size_t i = 0; i < photo_dim; ++i) centered(static_cast<Eigen::Index>(i)) = raw[i] - cluster.pca_mean(static_cast<Eigen::Index>(i));
  Eigen::VectorXd projected(static_cast<Eigen::Index>(dims));
  for (std::size_t k = 0; k < dims; ++k) {
    projected(static_cast<Eigen::Index>(k)) =
        ks.dot(cluster.pca_basis.col(static_cast<Eigen::Index>(k)).data(), centered.data(), photo_dim);
  }

  const Eigen::VectorXd distances = compute_distances(projected, cluster.photo_patches);

  std::vector<std::uint32_t> columns;
  std::optional<Eigen::MatrixXd> pruned_dict;
  Eigen::VectorXd pruned_dist;
  if (cfg.mode == SynthesisMode::FastRslcr) {
    columns = select_knn(std::span<const double>(distances.data(), n), cfg.neighbors);
    pruned_dict.emplace(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(columns.size()));
    pruned_dist.resize(static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      pruned_dict->col(kk) = cluster.photo_patches.col(columns[k]);
      pruned_dist(kk) = distances(columns[k]);
    }
  } else {
    columns.resize(n);
    std::iota(columns.begin(), columns.end(), 0U);
  }

  const Eigen::Ref<const Eigen::MatrixXd> dict =
      pruned_dict ? Eigen::Ref<const Eigen::MatrixXd>(*pruned_dict)
                  : Eigen::Ref<const Eigen::MatrixXd>(cluster.photo_patches);
  const Eigen::Ref<const Eigen::VectorXd> dist =
      pruned_dict ? Eigen::Ref<const Eigen::VectorXd>(pruned_dist)
                  : Eigen::Ref<const Eigen::VectorXd>(distances);

  Eigen::VectorXd weights;
  try {
    weights = solve_lcr({projected, dict, dist, cfg.effective_lambda()}).values;
  } catch (const Error& e) {
    const bool recoverable =
        e.code() == ErrorCode::SingularSystem || e.code() == ErrorCode::NonFiniteResult;
    if (fallback_reason == nullptr || !recoverable) throw;
    *fallback_reason = std::string(error_code_name(e.code())) + ": " + e.what();
    weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(columns.size()),
                                        1.0 / static_cast<double>(columns.size()));
  }

  std::vector<double> sketch(sketch_dim);
  ks.weighted_column_sum(cluster.sketch_patches.data(), sketch_dim,
                         static_cast<std::size_t>(cluster.sketch_patches.outerStride()),
                         columns.data(), weights.data(), columns.size(), sketch.data());
  return sketch;
}

}  // namespace

std::string_view mode_name(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::Rslcr: return "rslcr";
    case SynthesisMode::FastRslcr: return "fast-rslcr";
    case SynthesisMode::LleBaseline: return "lle";
  }
  return "unknown";
}

void validate_config(const SynthesisConfig& cfg, const TrainedModel& model) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a finite non-negative number");
  }
  if (cfg.mode == SynthesisMode::FastRslcr &&
      (cfg.neighbors < 1 || cfg.neighbors > model.header.samples)) {
    throw Error(ErrorCode::KOutOfRange, "K = " + std::to_string(cfg.neighbors) +
                                            " must lie in [1, " +
                                            std::to_string(model.header.samples) +
                                            "] (samples per cluster in the model)");
  }
}

std::vector<double> synthesize_patch(const ClusterModel& cluster, std::span<const double> raw_test_patch,
                                     const SynthesisConfig& cfg) {
  if (cfg.mode == SynthesisMode::FastRslcr &&
      (cfg.neighbors < 1 || cfg.neighbors > cluster.samples())) {
    throw Error(ErrorCode::KOutOfRange, "K = " + std::to_string(cfg.neighbors) +
                                            " exceeds the cluster's " +
                                            std::to_string(cluster.samples()) + " samples");
  }
  return reconstruct(cluster, raw_test_patch, cfg, nullptr);
}

std::vector<PatchVector> synthesize_patches(const TrainedModel& model, const ImageRaster& photo,
                                            const SynthesisConfig& cfg, SynthesisReport* report) {
  validate_config(cfg, model);
  if (photo.height != model.header.height || photo.width != model.header.width) {
    throw Error(ErrorCode::DimensionMismatch,
                "photo is " + std::to_string(photo.height) + "x" + std::to_string(photo.width) +
                    " but the model was trained on " + std::to_string(model.header.height) + "x" +
                    std::to_string(model.header.width));
  }
  const ImageRaster color = to_color(photo);
  const PatchGrid grid = model.grid();
  if (model.clusters.size() != grid.size()) {
    throw Error(ErrorCode::DimensionMismatch, "model cluster count does not match its grid");
  }

  std::vector<PatchVector> patches(grid.size());
  std::vector<std::string> fallback(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t k) {
    const auto idx = grid.index(k);
    try {
      const PatchVector input = extract_patch(color, grid, idx);
      patches[k].location = idx;
      patches[k].values = reconstruct(model.clusters[k], input.values, cfg, &fallback[k]);
    } catch (const Error& e) {
      throw Error(e.code(), "patch " + location_string(idx) + ": " + e.what());
    }
  });

  if (report != nullptr) {
    report->patches = grid.size();
    report->fallbacks.clear();
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (fallback[k].empty()) continue;
    const auto idx = grid.index(k);
    spdlog::warn("solver fallback at {}: {}; using uniform weights", location_string(idx), fallback[k]);
    if (report != nullptr) report->fallbacks.push_back({idx, fallback[k]});
  }
  return patches;
}

ImageRaster synthesize_image(const TrainedModel& model, const ImageRaster& photo,
                             const SynthesisConfig& cfg, SynthesisReport* report) {
  const auto patches = synthesize_patches(model, photo, cfg, report);
  return assemble(patches, model.grid());
}

}  // namespace rslcr
