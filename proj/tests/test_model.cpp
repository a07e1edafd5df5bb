#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "rslcr/error.hpp"
#include "rslcr/eval.hpp"
#include "rslcr/model.hpp"
#include "support.hpp"

using namespace rslcr;

namespace {

struct Pairs {
  std::vector<ImageRaster> photos;
  std::vector<ImageRaster> sketches;
};

Pairs synthetic_pairs(std::size_t count, std::size_t h, std::size_t w, std::uint64_t seed) {
  Pairs out;
  for (std::size_t k = 0; k < count; ++k) {
    auto [photo, sketch] = synthetic_pair(h, w, seed, k);
    out.photos.push_back(std::move(photo));
    out.sketches.push_back(std::move(sketch));
  }
  return out;
}

std::vector<char> file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode load_error(const std::filesystem::path& path) {
  try {
    load_model(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("load_model unexpectedly succeeded");
  return ErrorCode::InvalidArgument;
}

bool same_model(const TrainedModel& a, const TrainedModel& b) {
  if (!(a.header == b.header) || a.clusters.size() != b.clusters.size()) return false;
  for (std::size_t k = 0; k < a.clusters.size(); ++k) {
    const auto& x = a.clusters[k];
    const auto& y = b.clusters[k];
    if (!(x.location == y.location) || x.pca_mean != y.pca_mean || x.pca_basis != y.pca_basis ||
        x.photo_patches != y.photo_patches || x.sketch_patches != y.sketch_patches) {
      return false;
    }
  }
  return true;
}

// Corner locations see 3x3 offsets per pair.
TrainingParams small_params(std::size_t pairs) {
  TrainingParams params;
  params.patch_size = 8;
  params.overlap = 4;
  params.search_length = 2;
  params.samples = 9 * pairs;
  return params;
}

}  // namespace

TEST_CASE("search_region clips offsets at borders") {
  const auto g = grid_layout(250, 200, 20, 14);
  CHECK(search_region(g, {10, 10}, 5).candidate_offsets.size() == 121);
  const auto corner = search_region(g, {0, 0}, 5);
  CHECK(corner.candidate_offsets.size() == 36);
  CHECK(corner.candidate_offsets.front() == PixelOffset{0, 0});
  const auto last = search_region(g, {39, 30}, 5);
  CHECK(last.candidate_offsets.size() == 36);
  CHECK(last.candidate_offsets.back() == PixelOffset{0, 0});
  CHECK(search_region(g, {5, 5}, 0).candidate_offsets.size() == 1);

  testing::Gen gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto idx = GridIndex{gen.index(0, g.rows - 1), gen.index(0, g.cols - 1)};
    const std::size_t s = gen.index(0, 8);
    const auto region = search_region(g, idx, s);
    CHECK(region.candidate_offsets.size() <= (2 * s + 1) * (2 * s + 1));
    const auto pos = g.position(idx);
    for (const auto& off : region.candidate_offsets) {
      const long top = static_cast<long>(pos.top) + off.dy;
      const long left = static_cast<long>(pos.left) + off.dx;
      CHECK(top >= 0);
      CHECK(left >= 0);
      CHECK(top + 20 <= 250);
      CHECK(left + 20 <= 200);
    }
  }
}

TEST_CASE("uniform_below stays in range and is reproducible") {
  std::mt19937_64 a(5);
  std::mt19937_64 b(5);
  for (std::uint64_t bound : {1ULL, 2ULL, 7ULL, 10648ULL, (1ULL << 63) + 3}) {
    for (int i = 0; i < 100; ++i) {
      const auto v = uniform_below(a, bound);
      CHECK(v < bound);
      CHECK(v == uniform_below(b, bound));
    }
  }
  CHECK_THROWS_AS(uniform_below(a, 0), Error);
}

TEST_CASE("sample_cluster draws from the full joint pool") {
  // 88 pairs and s=5 at an interior location: 121 * 88 = 10648 candidates.
  const std::size_t pairs = 88;
  std::vector<ImageRaster> photos(pairs, ImageRaster(60, 60, 3, 1.0));
  std::vector<ImageRaster> sketches(pairs, ImageRaster(60, 60, 1, 2.0));
  const auto g = grid_layout(60, 60, 20, 14);
  auto rng = cluster_rng(3, {2, 2});
  const auto s = sample_cluster(photos, sketches, g, {2, 2}, 5, 800, rng);
  CHECK(s.photo.cols() == 800);
  CHECK(s.photo.rows() == 1200);
  CHECK(s.sketch.rows() == 400);

  auto again = cluster_rng(3, {2, 2});
  CHECK_THROWS_AS(sample_cluster(photos, sketches, g, {2, 2}, 5, 10649, again), Error);
  try {
    auto r = cluster_rng(3, {2, 2});
    sample_cluster(photos, sketches, g, {2, 2}, 5, 10649, r);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientCandidates);
  }
}

TEST_CASE("sample_cluster with a single candidate returns that pair") {
  testing::Gen gen(2);
  const std::vector<ImageRaster> photos{gen.image(26, 26, 3)};
  const std::vector<ImageRaster> sketches{gen.image(26, 26, 1)};
  const auto g = grid_layout(26, 26, 20, 14);
  auto rng = cluster_rng(9, {1, 1});
  const auto s = sample_cluster(photos, sketches, g, {1, 1}, 0, 1, rng);
  const auto photo_patch = extract_patch(photos[0], g, {1, 1});
  const auto sketch_patch = extract_patch(sketches[0], g, {1, 1});
  for (std::size_t i = 0; i < photo_patch.values.size(); ++i) {
    CHECK(s.photo(static_cast<Eigen::Index>(i), 0) == photo_patch.values[i]);
  }
  for (std::size_t i = 0; i < sketch_patch.values.size(); ++i) {
    CHECK(s.sketch(static_cast<Eigen::Index>(i), 0) == static_cast<float>(sketch_patch.values[i]));
  }
  CHECK(s.sources.front() == PatchSource{0, {0, 0}});
}

TEST_CASE("sample_cluster: determinism, no duplicates, pairing integrity") {
  testing::Gen gen(3);
  const auto pairs = [&] {
    Pairs p;
    for (int k = 0; k < 5; ++k) {
      p.photos.push_back(gen.image(40, 36, 3, true));
      p.sketches.push_back(gen.image(40, 36, 1, true));
    }
    return p;
  }();
  const auto g = grid_layout(40, 36, 12, 6);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto idx = g.index(k);
    auto r1 = cluster_rng(42, idx);
    auto r2 = cluster_rng(42, idx);
    const auto pool = search_region(g, idx, 3).candidate_offsets.size() * 5;
    const std::size_t n = std::min<std::size_t>(pool, 100);
    const auto a = sample_cluster(pairs.photos, pairs.sketches, g, idx, 3, n, r1);
    const auto b = sample_cluster(pairs.photos, pairs.sketches, g, idx, 3, n, r2);
    CHECK(a.sources == b.sources);
    CHECK(a.photo == b.photo);

    std::set<std::tuple<std::size_t, int, int>> seen;
    for (const auto& src : a.sources) seen.insert({src.image, src.offset.dy, src.offset.dx});
    CHECK(seen.size() == n);

    const auto pos = g.position(idx);
    std::vector<double> photo_buf(3 * 144);
    std::vector<double> sketch_buf(144);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& src = a.sources[c];
      const auto top = static_cast<std::size_t>(static_cast<long>(pos.top) + src.offset.dy);
      const auto left = static_cast<std::size_t>(static_cast<long>(pos.left) + src.offset.dx);
      extract_window(pairs.photos[src.image], top, left, 12, photo_buf);
      extract_window(pairs.sketches[src.image], top, left, 12, sketch_buf);
      const auto col = static_cast<Eigen::Index>(c);
      bool ok = true;
      for (std::size_t i = 0; i < photo_buf.size(); ++i) ok &= a.photo(static_cast<Eigen::Index>(i), col) == photo_buf[i];
      for (std::size_t i = 0; i < sketch_buf.size(); ++i)
        ok &= a.sketch(static_cast<Eigen::Index>(i), col) == static_cast<float>(sketch_buf[i]);
      CHECK(ok);
    }
  }
}

TEST_CASE("different locations get different streams") {
  auto a = cluster_rng(1, {0, 1});
  auto b = cluster_rng(1, {1, 0});
  auto c = cluster_rng(2, {0, 1});
  const auto va = a();
  CHECK(va != b());
  CHECK(va != c());
}

TEST_CASE("fit_pca recovers a rank-2 subspace") {
  testing::Gen gen(4);
  const Eigen::MatrixXd basis = gen.matrix(30, 2);
  const Eigen::MatrixXd coeffs = gen.matrix(2, 50);
  const Eigen::VectorXd offset = gen.vector(30, 100, 150);
  const Eigen::MatrixXd data = (basis * coeffs).colwise() + offset;
  const auto fit = fit_pca(data, 0.99);
  CHECK(fit.basis.cols() == 2);
  CHECK_FALSE(fit.degenerate);
  // The recovered basis spans the generating one.
  const Eigen::MatrixXd residual = basis - fit.basis * (fit.basis.transpose() * basis);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fit.retained_energy >= 0.99);
}

TEST_CASE("fit_pca on identical columns") {
  const Eigen::MatrixXd data = Eigen::VectorXd::LinSpaced(12, 1.0, 12.0).replicate(1, 9);
  const auto fit = fit_pca(data, 0.99);
  CHECK(fit.degenerate);
  CHECK(fit.basis.cols() == 1);
  CHECK(fit.projected.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.basis.col(0).norm() == 1.0);
  CHECK((fit.mean - data.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_pca with full energy reconstructs the input") {
  testing::Gen gen(5);
  // Gram route (n < m) and scatter route (n >= m).
  for (auto [m, n] : {std::pair<Eigen::Index, Eigen::Index>{40, 15}, {12, 30}}) {
    const Eigen::MatrixXd data = gen.matrix(m, n, 0, 255);
    const auto fit = fit_pca(data, 1.0);
    CHECK(fit.basis.cols() == std::min(m, n - 1));
    const Eigen::MatrixXd rebuilt = (fit.basis * fit.projected).colwise() + fit.mean;
    CHECK((rebuilt - data).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::MatrixXd gram = fit.basis.transpose() * fit.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("fit_pca property: minimal dimension and orthonormal basis") {
  testing::Gen gen(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = static_cast<Eigen::Index>(gen.index(3, 40));
    const auto n = static_cast<Eigen::Index>(gen.index(2, 40));
    const double energy = gen.uniform(0.5, 1.0);
    // Decaying column scales make the spectrum uneven.
    Eigen::MatrixXd data = gen.matrix(m, n);
    for (Eigen::Index r = 0; r < m; ++r) data.row(r) *= std::pow(0.7, static_cast<double>(r));
    const auto fit = fit_pca(data, energy);
    const Eigen::Index d = fit.basis.cols();
    const double total = fit.eigenvalues.cwiseMax(0.0).sum();
    CHECK(fit.eigenvalues.head(d).sum() >= energy * total * (1 - 1e-10));
    if (d > 1) CHECK(fit.eigenvalues.head(d - 1).sum() < energy * total);
    const Eigen::MatrixXd gram = fit.basis.transpose() * fit.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::MatrixXd expected = fit.basis.transpose() * (data.colwise() - fit.mean);
    CHECK((fit.projected - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("fit_pca rejects bad input") {
  CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd::Ones(3, 4), 0.0), Error);
  CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd::Ones(3, 4), 1.5), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 4);
  bad(1, 1) = NAN;
  CHECK_THROWS_AS(fit_pca(bad, 0.9), Error);
}

TEST_CASE("train on a single pair with one sample") {
  testing::Gen gen(7);
  const std::vector<ImageRaster> photos{gen.image(20, 20, 3)};
  const std::vector<ImageRaster> sketches{gen.image(20, 20, 1)};
  TrainingParams params;
  params.search_length = 0;
  params.samples = 1;
  const auto model = train(photos, sketches, params, 1, 1);
  REQUIRE(model.clusters.size() == 1);
  CHECK(model.clusters[0].samples() == 1);
  CHECK(model.clusters[0].reduced_dim() == 1);
  const auto patch = extract_patch(sketches[0], model.grid(), {0, 0});
  for (std::size_t i = 0; i < 400; ++i) {
    CHECK(model.clusters[0].sketch_patches(static_cast<Eigen::Index>(i), 0) ==
          static_cast<float>(patch.values[i]));
  }
}

TEST_CASE("train: shapes, invariants and thread independence") {
  const auto data = synthetic_pairs(6, 40, 32, 11);
  const auto params = small_params(6);
  TrainingStats stats;
  const auto one = train(data.photos, data.sketches, params, 5, 1, &stats);
  const auto many = train(data.photos, data.sketches, params, 5, 4);
  CHECK(same_model(one, many));
  const auto g = grid_layout(40, 32, 8, 4);
  CHECK(one.clusters.size() == g.size());
  CHECK(one.header.rows == g.rows);
  CHECK(one.header.training_pairs == 6);
  CHECK(stats.min_retained_energy >= 0.99);
  for (std::size_t k = 0; k < one.clusters.size(); ++k) {
    const auto& c = one.clusters[k];
    CHECK(c.location == g.index(k));
    CHECK(c.samples() == 54);
    CHECK(c.reduced_dim() <= std::min<std::size_t>(192, 54));
    const Eigen::MatrixXd gram = c.pca_basis.transpose() * c.pca_basis;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
  }
  const auto other_seed = train(data.photos, data.sketches, params, 6, 1);
  CHECK_FALSE(same_model(one, other_seed));
}

TEST_CASE("train rejects mismatched or insufficient data") {
  const auto data = synthetic_pairs(2, 40, 32, 1);
  auto params = small_params(2);
  std::vector<ImageRaster> fewer(data.sketches.begin(), data.sketches.begin() + 1);
  CHECK_THROWS_AS(train(data.photos, fewer, params, 1, 1), Error);

  std::vector<ImageRaster> wrong = data.sketches;
  wrong[1] = ImageRaster(40, 30, 1);
  CHECK_THROWS_AS(train(data.photos, wrong, params, 1, 1), Error);

  params.samples = 1000;
  try {
    train(data.photos, data.sketches, params, 1, 1);
    FAIL("expected InsufficientCandidates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientCandidates);
  }
}

TEST_CASE("model file round trip and determinism") {
  testing::ScratchDir dir("model");
  const auto data = synthetic_pairs(4, 40, 32, 2);
  const auto model = train(data.photos, data.sketches, small_params(4), 9, 1);
  save_model(model, dir / "a.bin");
  save_model(train(data.photos, data.sketches, small_params(4), 9, 2), dir / "b.bin");
  CHECK(file_bytes(dir / "a.bin") == file_bytes(dir / "b.bin"));

  const auto loaded = load_model(dir / "a.bin");
  CHECK(loaded.header == model.header);
  // Stored payloads are single precision.
  for (std::size_t k = 0; k < model.clusters.size(); ++k) {
    const auto& a = model.clusters[k];
    const auto& b = loaded.clusters[k];
    CHECK(b.pca_basis.cols() == a.pca_basis.cols());
    CHECK((a.pca_basis.cast<float>().cast<double>() - b.pca_basis).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.sketch_patches == b.sketch_patches);
  }
  // A loaded model survives another cycle bit for bit.
  save_model(loaded, dir / "c.bin");
  CHECK(file_bytes(dir / "a.bin") == file_bytes(dir / "c.bin"));
  CHECK(same_model(loaded, load_model(dir / "c.bin")));
}

TEST_CASE("model file corruption is detected") {
  testing::ScratchDir dir("corrupt");
  const auto data = synthetic_pairs(3, 40, 32, 3);
  save_model(train(data.photos, data.sketches, small_params(3), 1, 1), dir / "m.bin");
  const auto bytes = file_bytes(dir / "m.bin");

  for (std::size_t cut : {std::size_t{2}, std::size_t{30}, std::size_t{70}, bytes.size() / 2, bytes.size() - 1}) {
    write_bytes(dir / "t.bin", std::vector<char>(bytes.begin(), bytes.begin() + static_cast<long>(cut)));
    CHECK(load_error(dir / "t.bin") == ErrorCode::CorruptFile);
  }
  auto extra = bytes;
  extra.push_back(0);
  write_bytes(dir / "x.bin", extra);
  CHECK(load_error(dir / "x.bin") == ErrorCode::CorruptFile);

  auto bumped = bytes;
  bumped[4] = 2;
  write_bytes(dir / "v.bin", bumped);
  CHECK(load_error(dir / "v.bin") == ErrorCode::UnsupportedVersion);

  auto magic = bytes;
  magic[0] = 'X';
  write_bytes(dir / "g.bin", magic);
  CHECK(load_error(dir / "g.bin") == ErrorCode::CorruptFile);

  auto rows = bytes;
  rows[4 + 4 + 6 * 4] = 99;  // header field r
  write_bytes(dir / "r.bin", rows);
  CHECK(load_error(dir / "r.bin") == ErrorCode::CorruptFile);

  auto dim = bytes;
  const std::size_t first_cluster = 4 + 4 + 8 * 4 + 8 + 8 + 4;
  dim[first_cluster] = 0;
  dim[first_cluster + 1] = 0;
  dim[first_cluster + 2] = 0;
  dim[first_cluster + 3] = 0;
  write_bytes(dir / "d.bin", dim);
  CHECK(load_error(dir / "d.bin") == ErrorCode::CorruptFile);

  CHECK(load_error(dir / "absent.bin") == ErrorCode::IoFailure);
}
