// Model file layout (little-endian):
//   "RSLC" u32 version
//   u32 height width p o s n_rs r c; u64 seed; f64 energy; u32 M
//   r*c cluster blocks in row-major (i, j) order:
//     u32 D; f32[3p^2] mean; f32[3p^2*D] E; f32[D*n_rs] X; f32[p^2*n_rs] Y
//   (all matrices column-major)

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rslcr/error.hpp"
#include "rslcr/fsutil.hpp"
#include "rslcr/model.hpp"

namespace rslcr {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'L', 'C'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 * 4 + 8 + 8 + 4;

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  template <typename Derived>
  void f32_matrix(const Eigen::DenseBase<Derived>& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) f32(static_cast<float>(m(r, c)));
    }
  }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

  void flush_to(std::ostream& out) {
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    bytes_.clear();
  }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorCode::CorruptFile, "model file section is truncated");
  }

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_exact(std::ifstream& in, std::uint64_t n, const char* what) {
  std::vector<unsigned char> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(in.gcount()) != n) {
    throw Error(ErrorCode::CorruptFile, std::string("model file truncated in ") + what);
  }
  return buf;
}

void validate_header(const ModelHeader& h) {
  auto corrupt = [](const std::string& why) { throw Error(ErrorCode::CorruptFile, "model header: " + why); };
  if (h.patch_size == 0 || h.overlap >= h.patch_size || h.patch_size > h.height ||
      h.patch_size > h.width) {
    corrupt("invalid patch geometry");
  }
  const auto grid = grid_layout(h.height, h.width, h.patch_size, h.overlap);
  if (grid.rows != h.rows || grid.cols != h.cols) corrupt("grid size disagrees with image geometry");
  if (h.samples == 0) corrupt("zero samples per cluster");
  if (h.training_pairs == 0) corrupt("zero training pairs");
  if (!(h.energy > 0.0 && h.energy <= 1.0)) corrupt("energy outside (0, 1]");
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto& h = model.header;
  const std::size_t p = h.patch_size;
  const std::size_t photo_dim = 3 * p * p;
  if (model.clusters.size() != static_cast<std::size_t>(h.rows) * h.cols) {
    throw Error(ErrorCode::DimensionMismatch, "cluster count does not match the header grid");
  }

  AtomicFile file(path);
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kModelFormatVersion);
  for (std::uint32_t v : {h.height, h.width, h.patch_size, h.overlap, h.search_length, h.samples,
                          h.rows, h.cols}) {
    w.u32(v);
  }
  w.u64(h.seed);
  w.f64(h.energy);
  w.u32(h.training_pairs);
  w.flush_to(file.stream());

  for (const auto& c : model.clusters) {
    const auto d = c.pca_basis.cols();
    if (static_cast<std::size_t>(c.pca_mean.size()) != photo_dim ||
        static_cast<std::size_t>(c.pca_basis.rows()) != photo_dim || c.photo_patches.rows() != d ||
        c.photo_patches.cols() != h.samples || c.sketch_patches.rows() != static_cast<Eigen::Index>(p * p) ||
        c.sketch_patches.cols() != h.samples) {
      throw Error(ErrorCode::DimensionMismatch, "cluster matrices disagree with the model header");
    }
    w.u32(static_cast<std::uint32_t>(d));
    w.f32_matrix(c.pca_mean);
    w.f32_matrix(c.pca_basis);
    w.f32_matrix(c.photo_patches);
    w.f32_matrix(c.sketch_patches);
    w.flush_to(file.stream());
  }
  file.commit();
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open model file " + path.string());
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot stat model file " + path.string());

  if (file_size < kHeaderBytes) {
    throw Error(ErrorCode::CorruptFile, "model file truncated in header: " + path.string());
  }
  const auto header_bytes = read_exact(in, kHeaderBytes, "header");
  if (std::memcmp(header_bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::CorruptFile, "bad magic; not a model file: " + path.string());
  }
  ByteReader r(std::vector<unsigned char>(header_bytes.begin() + 4, header_bytes.end()));
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "model format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  TrainedModel model;
  auto& h = model.header;
  h.height = r.u32();
  h.width = r.u32();
  h.patch_size = r.u32();
  h.overlap = r.u32();
  h.search_length = r.u32();
  h.samples = r.u32();
  h.rows = r.u32();
  h.cols = r.u32();
  h.seed = r.u64();
  h.energy = r.f64();
  h.training_pairs = r.u32();
  validate_header(h);

  const std::uint64_t p = h.patch_size;
  const std::uint64_t photo_dim = 3 * p * p;
  const std::uint64_t n = h.samples;
  std::uint64_t remaining = file_size - kHeaderBytes;
  const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
  model.clusters.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (remaining < 4) throw Error(ErrorCode::CorruptFile, "model file truncated before cluster " + std::to_string(k));
    ByteReader dim_reader(read_exact(in, 4, "cluster header"));
    remaining -= 4;
    const std::uint64_t d = dim_reader.u32();
    if (d == 0 || d > photo_dim || d > n) {
      throw Error(ErrorCode::CorruptFile, "cluster " + std::to_string(k) + " has invalid reduced dimension " +
                                              std::to_string(d));
    }
    const std::uint64_t floats = photo_dim + photo_dim * d + d * n + p * p * n;
    if (remaining < 4 * floats) {
      throw Error(ErrorCode::CorruptFile, "model file truncated in cluster " + std::to_string(k));
    }
    ByteReader body(read_exact(in, 4 * floats, "cluster body"));
    remaining -= 4 * floats;

    auto& c = model.clusters[k];
    c.location = {k / h.cols, k % h.cols};
    const auto pd = static_cast<Eigen::Index>(photo_dim);
    const auto dd = static_cast<Eigen::Index>(d);
    const auto nn = static_cast<Eigen::Index>(n);
    const auto area = static_cast<Eigen::Index>(p * p);
    c.pca_mean.resize(pd);
    for (Eigen::Index i = 0; i < pd; ++i) c.pca_mean(i) = body.f32();
    c.pca_basis.resize(pd, dd);
    for (Eigen::Index col = 0; col < dd; ++col)
      for (Eigen::Index row = 0; row < pd; ++row) c.pca_basis(row, col) = body.f32();
    c.photo_patches.resize(dd, nn);
    for (Eigen::Index col = 0; col < nn; ++col)
      for (Eigen::Index row = 0; row < dd; ++row) c.photo_patches(row, col) = body.f32();
    c.sketch_patches.resize(area, nn);
    for (Eigen::Index col = 0; col < nn; ++col)
      for (Eigen::Index row = 0; row < area; ++row) c.sketch_patches(row, col) = body.f32();
  }
  if (remaining != 0) {
    throw Error(ErrorCode::CorruptFile, "model file has " + std::to_string(remaining) + " trailing bytes");
  }
  return model;
}

}  // namespace rslcr
