#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "rslcr/error.hpp"
#include "rslcr/eval.hpp"
#include "rslcr/fsutil.hpp"
#include "rslcr/model.hpp"
#include "rslcr/parallel.hpp"
#include "rslcr/synth.hpp"

namespace rslcr::cli {

namespace fs = std::filesystem;

namespace {

struct TrainFlags {
  std::string photos, sketches, out;
  TrainingParams params;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct SynthFlags {
  std::string model, input, output;
  bool fast = false;
  std::string mode;
  std::size_t k = 200;
  double lambda = 0.5;
  std::size_t threads = 0;
  bool verbose = false;
};

struct EvalFlags {
  std::string ref, test, out;
};

struct BenchFlags {
  std::string model, input, csv;
  std::size_t reps = 3;
  bool fast = false;
  std::string mode;
  std::size_t k = 200;
  double lambda = 0.5;
};

struct GenFlags {
  std::size_t count = 0;
  std::size_t height = 250;
  std::size_t width = 200;
  std::uint64_t seed = 0;
  std::string photos_out, sketches_out;
};

void configure_logging(const std::string& level) {
  auto logger = spdlog::get("rslcr");
  if (!logger) {
    logger = spdlog::stderr_color_mt("rslcr");
    spdlog::set_default_logger(logger);
  }
  spdlog::set_level(spdlog::level::from_str(level));
}

SynthesisConfig make_config(bool fast, const std::string& mode, std::size_t k, double lambda,
                            std::size_t threads) {
  SynthesisConfig cfg;
  cfg.lambda = lambda;
  cfg.neighbors = k;
  cfg.threads = threads;
  if (mode.empty()) {
    cfg.mode = fast ? SynthesisMode::FastRslcr : SynthesisMode::Rslcr;
  } else if (mode == "rslcr") {
    cfg.mode = SynthesisMode::Rslcr;
  } else if (mode == "fast" || mode == "fast-rslcr") {
    cfg.mode = SynthesisMode::FastRslcr;
  } else if (mode == "lle") {
    cfg.mode = SynthesisMode::LleBaseline;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + mode + "'");
  }
  if (fast && cfg.mode != SynthesisMode::FastRslcr) {
    throw Error(ErrorCode::InvalidArgument, "--fast conflicts with --mode " + mode);
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "--lambda must be non-negative");
  if (cfg.mode == SynthesisMode::FastRslcr && k < 1) {
    throw Error(ErrorCode::KOutOfRange, "--k must be at least 1");
  }
  return cfg;
}

// Photo/sketch PNGs paired by identical file name.
void load_training_pairs(const fs::path& photo_dir, const fs::path& sketch_dir,
                         std::vector<ImageRaster>& photos, std::vector<ImageRaster>& sketches) {
  std::set<std::string> photo_names, sketch_names;
  for (const auto& f : list_png_files(photo_dir)) photo_names.insert(f.filename().string());
  for (const auto& f : list_png_files(sketch_dir)) sketch_names.insert(f.filename().string());
  for (const auto& name : photo_names) {
    if (!sketch_names.count(name)) {
      throw Error(ErrorCode::UnpairedFile, "unpaired file: photo " + name + " has no sketch");
    }
  }
  for (const auto& name : sketch_names) {
    if (!photo_names.count(name)) {
      throw Error(ErrorCode::UnpairedFile, "unpaired file: sketch " + name + " has no photo");
    }
  }
  if (photo_names.empty()) throw Error(ErrorCode::InvalidArgument, "no training PNGs in " + photo_dir.string());
  for (const auto& name : photo_names) {
    photos.push_back(read_png(photo_dir / name));
    sketches.push_back(read_png(sketch_dir / name));
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  const auto& p = f.params;
  if (p.patch_size == 0 || p.overlap >= p.patch_size) {
    throw Error(ErrorCode::InvalidGeometry, "--overlap must be smaller than --patch-size");
  }
  if (!(p.energy > 0.0 && p.energy <= 1.0)) throw Error(ErrorCode::InvalidArgument, "--energy must lie in (0, 1]");
  if (p.samples < 1) throw Error(ErrorCode::InvalidArgument, "--samples must be at least 1");

  std::vector<ImageRaster> photos, sketches;
  load_training_pairs(f.photos, f.sketches, photos, sketches);
  const auto start = std::chrono::steady_clock::now();
  TrainingStats stats;
  const TrainedModel model = train(photos, sketches, p, f.seed, f.threads, &stats);
  save_model(model, f.out);
  out << std::fixed << std::setprecision(2) << "trained " << model.clusters.size()
      << " clusters (grid " << model.header.rows << "x" << model.header.cols << ") from "
      << photos.size() << " pairs, mean D " << stats.mean_reduced_dim << ", elapsed "
      << seconds_since(start) << " s -> " << f.out << '\n';
  return kExitOk;
}

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  SynthesisConfig cfg = make_config(f.fast, f.mode, f.k, f.lambda, f.threads);
  const TrainedModel model = load_model(f.model);
  validate_config(cfg, model);

  const bool dir_input = fs::is_directory(f.input);
  const auto inputs = load_images(f.input);
  for (const auto& in : inputs) {
    if (in.image.height != model.header.height || in.image.width != model.header.width) {
      throw Error(ErrorCode::DimensionMismatch,
                  in.name + " is " + std::to_string(in.image.height) + "x" +
                      std::to_string(in.image.width) + " but the model expects " +
                      std::to_string(model.header.height) + "x" + std::to_string(model.header.width));
    }
  }
  fs::path output = f.output;
  const bool output_is_dir = dir_input || fs::is_directory(output);
  if (dir_input) fs::create_directories(output);

  for (const auto& in : inputs) {
    const auto start = std::chrono::steady_clock::now();
    SynthesisReport report;
    const ImageRaster sketch = synthesize_image(model, in.image, cfg, &report);
    const double elapsed = seconds_since(start);
    const fs::path target = output_is_dir ? output / in.name : output;
    write_png(sketch, target);
    if (f.verbose) {
      out << std::fixed << std::setprecision(3) << in.name << ": " << elapsed << " s, "
          << report.fallbacks.size() << " fallback patches -> " << target.string() << '\n';
    }
  }
  return kExitOk;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const SsimTable table = eval_directory(f.ref, f.test);
  const std::string csv = table.to_csv();
  if (f.out.empty()) {
    out << csv;
  } else {
    write_text_atomic(f.out, csv);
    out << std::fixed << std::setprecision(6) << "mean SSIM " << table.mean << " over "
        << table.rows.size() << " files -> " << f.out << '\n';
  }
  return kExitOk;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  if (f.reps < 1) throw Error(ErrorCode::InvalidArgument, "--reps must be at least 1");
  const SynthesisConfig cfg = make_config(f.fast, f.mode, f.k, f.lambda, 1);
  const TrainedModel model = load_model(f.model);
  validate_config(cfg, model);
  const auto inputs = load_images(f.input);
  const BenchReport report = bench_synthesis(model, inputs, cfg, f.reps);
  if (!f.csv.empty()) write_text_atomic(f.csv, report.to_csv());
  out << report.to_text();
  return kExitOk;
}

int cmd_gen(const GenFlags& f, std::ostream& out) {
  if (f.count < 1) throw Error(ErrorCode::InvalidArgument, "--count must be at least 1");
  if (f.height < 1 || f.width < 1) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  gen_synthetic(f.count, f.height, f.width, f.seed, f.photos_out, f.sketches_out);
  out << "wrote " << f.count << " synthetic pairs (" << f.height << "x" << f.width << ") to "
      << f.photos_out << " and " << f.sketches_out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exemplar-based photo-to-sketch synthesis with random-sampled patch clusters"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Sample patch clusters and fit per-cluster PCA");
  train_cmd->add_option("--photos", train_flags.photos, "Directory of training photos")->required();
  train_cmd->add_option("--sketches", train_flags.sketches, "Directory of training sketches")->required();
  train_cmd->add_option("--out", train_flags.out, "Model file to write")->required();
  train_cmd->add_option("--patch-size", train_flags.params.patch_size, "Patch size p")->capture_default_str();
  train_cmd->add_option("--overlap", train_flags.params.overlap, "Overlap o")->capture_default_str();
  train_cmd->add_option("--search", train_flags.params.search_length, "Search length s")->capture_default_str();
  train_cmd->add_option("--samples", train_flags.params.samples, "Sampled pairs per cluster n_rs")->capture_default_str();
  train_cmd->add_option("--energy", train_flags.params.energy, "PCA energy kept")->capture_default_str();
  train_cmd->add_option("--seed", train_flags.seed, "Sampling seed")->capture_default_str();
  train_cmd->add_option("--threads", train_flags.threads, "Worker threads (0 = auto)");

  SynthFlags synth_flags;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize sketches from photos");
  synth_cmd->add_option("--model", synth_flags.model, "Model file")->required();
  synth_cmd->add_option("--input", synth_flags.input, "Photo PNG or directory of PNGs")->required();
  synth_cmd->add_option("--output", synth_flags.output, "Output PNG or directory")->required();
  synth_cmd->add_flag("--fast", synth_flags.fast, "Use only the K nearest sampled pairs");
  synth_cmd->add_option("--mode", synth_flags.mode, "rslcr, fast or lle");
  synth_cmd->add_option("--k", synth_flags.k, "K for fast mode")->capture_default_str();
  synth_cmd->add_option("--lambda", synth_flags.lambda, "Locality weight")->capture_default_str();
  synth_cmd->add_option("--threads", synth_flags.threads, "Worker threads (0 = auto)");
  synth_cmd->add_flag("--verbose", synth_flags.verbose, "Print per-image timing");

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval-ssim", "Mean SSIM of test sketches against references");
  eval_cmd->add_option("--ref", eval_flags.ref, "Reference sketch directory")->required();
  eval_cmd->add_option("--test", eval_flags.test, "Synthesized sketch directory")->required();
  eval_cmd->add_option("--out", eval_flags.out, "CSV file (default: stdout)");

  BenchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Time sketch synthesis");
  bench_cmd->add_option("--model", bench_flags.model, "Model file")->required();
  bench_cmd->add_option("--input", bench_flags.input, "Photo PNG or directory")->required();
  bench_cmd->add_option("--reps", bench_flags.reps, "Repetitions per image")->capture_default_str();
  bench_cmd->add_flag("--fast", bench_flags.fast, "Use only the K nearest sampled pairs");
  bench_cmd->add_option("--mode", bench_flags.mode, "rslcr, fast or lle");
  bench_cmd->add_option("--k", bench_flags.k, "K for fast mode")->capture_default_str();
  bench_cmd->add_option("--lambda", bench_flags.lambda, "Locality weight")->capture_default_str();
  bench_cmd->add_option("--csv", bench_flags.csv, "Per-sample CSV output");

  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a paired synthetic dataset");
  gen_cmd->add_option("--count", gen_flags.count, "Number of pairs")->required();
  gen_cmd->add_option("--height", gen_flags.height, "Image height")->capture_default_str();
  gen_cmd->add_option("--width", gen_flags.width, "Image width")->capture_default_str();
  gen_cmd->add_option("--seed", gen_flags.seed, "Dataset seed")->capture_default_str();
  gen_cmd->add_option("--photos-out", gen_flags.photos_out, "Photo directory")->required();
  gen_cmd->add_option("--sketches-out", gen_flags.sketches_out, "Sketch directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    configure_logging(log_level);
    if (*train_cmd) return cmd_train(train_flags, out);
    if (*synth_cmd) return cmd_synth(synth_flags, out);
    if (*eval_cmd) return cmd_eval(eval_flags, out);
    if (*bench_cmd) return cmd_bench(bench_flags, out);
    if (*gen_cmd) return cmd_gen(gen_flags, out);
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return is_precondition_error(e.code()) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rslcr::cli
