#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <iomanip>
#include <string>

#include "rslcr/error.hpp"
#include "rslcr/eval.hpp"
#include "rslcr/fsutil.hpp"
#include "rslcr/kernels.hpp"

namespace rslcr {

namespace {

// Valid-mode separable Gaussian filter of a row-major single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t height,
                                 std::size_t width, const std::vector<double>& taps) {
  const auto& ks = kernels::active();
  const std::size_t n = taps.size();
  const std::size_t out_w = width - n + 1;
  const std::size_t out_h = height - n + 1;
  std::vector<double> horizontal(height * out_w);
  for (std::size_t y = 0; y < height; ++y) {
    ks.correlate_valid(plane.data() + y * width, width, taps.data(), n, horizontal.data() + y * out_w);
  }
  std::vector<double> out(out_h * out_w, 0.0);
  for (std::size_t y = 0; y < out_h; ++y) {
    double* dst = out.data() + y * out_w;
    for (std::size_t t = 0; t < n; ++t) {
      const double tap = taps[t];
      const double* src = horizontal.data() + (y + t) * out_w;
      for (std::size_t x = 0; x < out_w; ++x) dst[x] += tap * src[x];
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_taps(const SsimParams& params) {
  if (params.window == 0 || !(params.sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SSIM window must be non-empty with positive sigma");
  }
  std::vector<double> taps(params.window);
  const double center = (static_cast<double>(params.window) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double offset = static_cast<double>(i) - center;
    taps[i] = std::exp(-offset * offset / (2.0 * params.sigma * params.sigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

double ssim(const ImageRaster& a, const ImageRaster& b, const SsimParams& params) {
  if (a.channels != 1 || b.channels != 1) {
    throw Error(ErrorCode::InvalidArgument, "SSIM expects single-channel images");
  }
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::DimensionMismatch,
                "SSIM inputs differ in size: " + std::to_string(a.height) + "x" +
                    std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                    std::to_string(b.width));
  }
  if (a.height < params.window || a.width < params.window) {
    throw Error(ErrorCode::DimensionMismatch, "image is smaller than the SSIM window");
  }
  if (!(params.k1 > 0.0) || !(params.k2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SSIM constants must be positive");
  }
  const auto taps = gaussian_taps(params);
  const std::size_t h = a.height;
  const std::size_t w = a.width;

  std::vector<double> aa(h * w), bb(h * w), ab(h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    aa[i] = a.data[i] * a.data[i];
    bb[i] = b.data[i] * b.data[i];
    ab[i] = a.data[i] * b.data[i];
  }
  const auto mu_a = filter_valid(a.data, h, w, taps);
  const auto mu_b = filter_valid(b.data, h, w, taps);
  const auto e_aa = filter_valid(aa, h, w, taps);
  const auto e_bb = filter_valid(bb, h, w, taps);
  const auto e_ab = filter_valid(ab, h, w, taps);

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma2 = mu_a[i] * mu_a[i];
    const double mb2 = mu_b[i] * mu_b[i];
    const double mab = mu_a[i] * mu_b[i];
    const double var_a = e_aa[i] - ma2;
    const double var_b = e_bb[i] - mb2;
    const double cov = e_ab[i] - mab;
    total += ((2.0 * mab + c1) * (2.0 * cov + c2)) / ((ma2 + mb2 + c1) * (var_a + var_b + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

std::string SsimTable::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(10) << std::fixed;
  out << "file,ssim\n";
  for (const auto& row : rows) out << row.file << ',' << row.score << '\n';
  out << "mean," << mean << '\n';
  return out.str();
}

SsimTable eval_directory(const std::filesystem::path& ref_dir, const std::filesystem::path& test_dir,
                         const SsimParams& params) {
  std::set<std::string> ref_names;
  std::set<std::string> test_names;
  for (const auto& f : list_png_files(ref_dir)) ref_names.insert(f.filename().string());
  for (const auto& f : list_png_files(test_dir)) test_names.insert(f.filename().string());
  for (const auto& name : ref_names) {
    if (!test_names.count(name)) {
      throw Error(ErrorCode::UnpairedFile, "unpaired file: " + name + " has no match in " + test_dir.string());
    }
  }
  for (const auto& name : test_names) {
    if (!ref_names.count(name)) {
      throw Error(ErrorCode::UnpairedFile, "unpaired file: " + name + " has no match in " + ref_dir.string());
    }
  }
  if (ref_names.empty()) throw Error(ErrorCode::InvalidArgument, "no PNG files in " + ref_dir.string());

  SsimTable table;
  double sum = 0.0;
  for (const auto& name : ref_names) {
    const auto ref = to_grayscale(read_png(ref_dir / name));
    const auto test = to_grayscale(read_png(test_dir / name));
    const double score = ssim(ref, test, params);
    table.rows.push_back({name, score});
    sum += score;
  }
  table.mean = sum / static_cast<double>(table.rows.size());
  return table;
}

}  // namespace rslcr
