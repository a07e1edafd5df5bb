#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "rslcr/error.hpp"
#include "rslcr/eval.hpp"
#include "rslcr/fsutil.hpp"
#include "rslcr/kernels.hpp"

namespace rslcr {

std::vector<NamedImage> load_images(const std::filesystem::path& file_or_dir) {
  std::vector<NamedImage> images;
  if (std::filesystem::is_directory(file_or_dir)) {
    for (const auto& f : list_png_files(file_or_dir)) {
      images.push_back({f.filename().string(), read_png(f)});
    }
  } else {
    images.push_back({file_or_dir.filename().string(), read_png(file_or_dir)});
  }
  if (images.empty()) throw Error(ErrorCode::InvalidArgument, "no PNG inputs in " + file_or_dir.string());
  return images;
}

std::string machine_descriptor() {
  std::ostringstream out;
  utsname info{};
  if (uname(&info) == 0) {
    out << info.sysname << ' ' << info.release << ' ' << info.machine;
  } else {
    out << "unknown-os";
  }
  out << ", " << std::thread::hardware_concurrency() << " hw threads, kernels="
      << kernels::active().name;
  return out.str();
}

BenchReport bench_synthesis(const TrainedModel& model, std::span<const NamedImage> inputs,
                            const SynthesisConfig& cfg, std::size_t repetitions) {
  if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs at least one input image");
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be at least 1");
  SynthesisConfig timed = cfg;
  timed.threads = 1;
  validate_config(timed, model);

  BenchReport report;
  report.model = model.header;
  report.config = timed;
  report.machine = machine_descriptor();
  for (const auto& input : inputs) {
    ImageRaster first;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      ImageRaster sketch = synthesize_image(model, input.image, timed);
      const auto stop = std::chrono::steady_clock::now();
      report.samples.push_back(
          {input.name, rep, std::chrono::duration<double>(stop - start).count()});
      if (rep == 0) {
        first = std::move(sketch);
      } else if (!(sketch == first)) {
        report.outputs_identical = false;
      }
    }
  }

  std::vector<double> times;
  for (const auto& s : report.samples) times.push_back(s.seconds);
  const double n = static_cast<double>(times.size());
  double sum = 0.0;
  for (double t : times) sum += t;
  report.mean_seconds = sum / n;
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  report.median_seconds = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  double sq = 0.0;
  for (double t : times) sq += (t - report.mean_seconds) * (t - report.mean_seconds);
  report.stddev_seconds = times.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  return report;
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(6) << std::fixed;
  out << "file,repetition,seconds\n";
  for (const auto& s : samples) out << s.file << ',' << s.repetition << ',' << s.seconds << '\n';
  return out.str();
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << std::setprecision(4) << std::fixed;
  out << "machine: " << machine << '\n';
  out << "model: " << model.height << 'x' << model.width << ", p=" << model.patch_size
      << ", o=" << model.overlap << ", s=" << model.search_length << ", n_rs=" << model.samples
      << ", grid " << model.rows << 'x' << model.cols << ", M=" << model.training_pairs << '\n';
  out << "config: mode=" << mode_name(config.mode) << ", lambda=" << config.lambda;
  if (config.mode == SynthesisMode::FastRslcr) out << ", K=" << config.neighbors;
  out << '\n';
  out << "samples: " << samples.size() << '\n';
  out << "mean " << mean_seconds << " s, median " << median_seconds << " s, stddev "
      << stddev_seconds << " s\n";
  out << "outputs identical across repetitions: " << (outputs_identical ? "yes" : "no") << '\n';
  return out.str();
}

}  // namespace rslcr
