// unfoldsr command line: degradation simulation, unfolded super-resolution,
// kernel tooling, equivalent-kernel estimation, and the PSNR benchmark.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unfoldsr/bench.hpp"
#include "unfoldsr/config.hpp"
#include "unfoldsr/degradation.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"
#include "unfoldsr/kernel_estimation.hpp"
#include "unfoldsr/png_io.hpp"
#include "unfoldsr/resample.hpp"
#include "unfoldsr/resunet.hpp"
#include "unfoldsr/schedule.hpp"
#include "unfoldsr/solver.hpp"
#include "unfoldsr/version.hpp"

namespace fs = std::filesystem;
using namespace unfoldsr;

namespace {

std::vector<std::string> list_files(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string e = entry.path().extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e == ext) out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct DegradeArgs {
  std::string hr, kernel, out;
  int scale = 2;
  double noise = 0.0;
  std::uint64_t seed = 0;
  bool crop = false;
  int bits = 8;
};

int run_degrade(const DegradeArgs& a) {
  Image x = read_png(a.hr);
  if (a.crop) x = center_crop_to_multiple(x, a.scale);
  const DegradationSpec spec{a.scale, load_kernel(a.kernel), a.noise};
  Rng rng(a.seed);
  write_png(a.out, clamp01(degrade(x, spec, rng)), a.bits);
  return 0;
}

struct SrArgs {
  std::string lr, kernel, out, weights, trace_dir, dump_schedule;
  std::string prior = "tv";
  int scale = 2;
  double noise = 0.0;
  int iters = 8;
  double beta_start = 49.0;
  double lambda = 1.0 / 3.0;
  double c_tv = 0.5;
  int tv_iters = 30;
  bool preprocess = false;
  int bits = 8;
};

int run_sr(const SrArgs& a) {
  const Image y = read_png(a.lr);
  const DegradationSpec spec{a.scale, load_kernel(a.kernel), a.noise};
  const HyperSchedule sched = analytic_schedule(a.noise, a.scale, a.iters, a.beta_start, a.lambda);
  if (!a.dump_schedule.empty()) write_text_file(a.dump_schedule, schedule_to_csv(sched));

  std::unique_ptr<DenoiserPrior> prior;
  if (a.prior == "tv") {
    prior = std::make_unique<TvDenoiser>(a.tv_iters, a.c_tv);
  } else if (a.prior == "identity") {
    prior = std::make_unique<IdentityDenoiser>();
  } else if (a.prior == "cnn") {
    if (a.weights.empty()) throw std::runtime_error("--prior cnn requires --weights");
    prior = std::make_unique<CnnDenoiser>(load_weights(a.weights));
  } else {
    throw std::runtime_error("unknown prior '" + a.prior + "' (expected tv, cnn or identity)");
  }

  if (a.preprocess) {
    if (!a.trace_dir.empty())
      throw std::runtime_error("--trace-dir cannot be combined with --preprocess-boundary");
    write_png(a.out, solve_with_boundary_handling(y, spec, *prior, sched), a.bits);
    return 0;
  }

  SolveOptions opts;
  opts.keep_trace = !a.trace_dir.empty();
  const SolveResult res = unfold_sr(y, spec, *prior, sched, opts);
  if (opts.keep_trace) {
    fs::create_directories(a.trace_dir);
    char name[32];
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      std::snprintf(name, sizeof name, "%s%02zu.png", i % 2 == 0 ? "z" : "x", i / 2 + 1);
      write_png((fs::path(a.trace_dir) / name).string(), clamp01(res.trace[i]), a.bits);
    }
  }
  write_png(a.out, res.output, a.bits);
  return 0;
}

struct KernelGenArgs {
  std::string type = "iso", out;
  int size = 25;
  double width = 1.6;
  double sigma_x = 2.0, sigma_y = 0.7, theta = 0.0;
  int steps = 64;
  std::uint64_t seed = 0;
};

int run_kernel_gen(const KernelGenArgs& a) {
  Kernel k;
  if (a.type == "iso") {
    k = gaussian_kernel(a.size, a.width, a.width);
  } else if (a.type == "aniso") {
    k = gaussian_kernel(a.size, a.sigma_x, a.sigma_y, a.theta);
  } else if (a.type == "motion") {
    Rng rng(a.seed);
    k = motion_kernel(a.size, a.steps, rng);
  } else if (a.type == "delta") {
    k = delta_kernel(a.size);
  } else {
    throw std::runtime_error("unknown kernel type '" + a.type + "'");
  }
  save_kernel(a.out, k);
  return 0;
}

int run_kernel_show(const std::string& path) {
  const Kernel k = load_kernel(path);
  const auto [cy, cx] = kernel_center_of_mass(k);
  double lo = k.data[0], hi = k.data[0];
  for (double v : k.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::printf("%s\n", path.c_str());
  std::printf("  size            %dx%d\n", k.height, k.width);
  std::printf("  sum             %.9f\n", k.sum());
  std::printf("  center of mass  (%.3f, %.3f)\n", cy, cx);
  std::printf("  tap range       [%.6g, %.6g]\n", lo, hi);
  // Coarse intensity map, one character per tap.
  const char* shades = " .:-=+*#%@";
  for (int y = 0; y < k.height; ++y) {
    std::fputs("  ", stdout);
    for (int x = 0; x < k.width; ++x) {
      const double t = hi > lo ? (k.at(y, x) - lo) / (hi - lo) : 0.0;
      std::fputc(shades[static_cast<int>(t * 9.0 + 0.5)], stdout);
    }
    std::fputc('\n', stdout);
  }
  return 0;
}

int run_kernel_bench_set(const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& [id, k] : benchmark_kernels())
    save_kernel((fs::path(dir) / (id + ".krn")).string(), k);
  std::printf("wrote 12 kernels to %s\n", dir.c_str());
  return 0;
}

struct EstimateArgs {
  std::string hr_dir, out, report;
  int scale = 0;
  int size = 25;
  double damping = 1e-8;
  int max_images = 8;
};

int run_estimate(const EstimateArgs& a) {
  const auto files = list_files(a.hr_dir, ".png");
  if (files.empty()) throw std::runtime_error("no PNG files in " + a.hr_dir);
  std::vector<std::pair<Image, Image>> pairs;
  for (const auto& f : files) {
    if (a.max_images > 0 && static_cast<int>(pairs.size()) >= a.max_images) break;
    const Image hr = center_crop_to_multiple(read_png(f), a.scale);
    pairs.emplace_back(hr, bicubic_downsample(hr, a.scale));
  }
  const KernelEstimate est = estimate_equivalent_kernel(pairs, a.scale, a.size, a.damping);
  save_kernel(a.out, est.kernel);

  const auto [cy, cx] = kernel_center_of_mass(est.kernel);
  const double mid = (a.size - 1) / 2.0;
  std::ostringstream report;
  report << "equivalent-kernel estimate (scale x" << a.scale << ", " << a.size << "x" << a.size
         << " taps, " << pairs.size() << " image pairs)\n";
  report.precision(6);
  report << "  residual rmse   " << est.residual_rmse << "\n";
  report << "  raw tap sum     " << est.raw_sum << "\n";
  report << "  center of mass  (" << cy << ", " << cx << ")\n";
  report << "  shift from mid  (" << cy - mid << ", " << cx - mid << ")\n";
  if (est.ill_conditioned)
    report << "  warning: HR content is nearly flat; the system was rank-deficient\n";
  std::fputs(report.str().c_str(), stdout);
  if (!a.report.empty()) write_text_file(a.report, report.str());
  return 0;
}

struct BenchArgs {
  std::string dataset, out, config_path, kernels_dir, weights;
  std::vector<std::string> scales, noises, methods;
  std::uint64_t seed = 0;
  int jobs = 1;
  int iters = 8;
  int shift_radius = 2;
  int crop_multiple = 12;
  bool no_timing = false;
  // which flags were set on the command line (flags > config > defaults)
  std::function<bool(const std::string&)> flag_given;
};

int run_bench(const BenchArgs& a) {
  BenchConfig cfg;
  ConfigFile file;
  if (!a.config_path.empty()) file = ConfigFile::parse(read_text_file(a.config_path));

  const auto pick_list = [&](const std::string& key, const std::vector<std::string>& cli_value) {
    if (a.flag_given(key) && !cli_value.empty()) return cli_value;
    if (file.has(key)) return file.get_list(key);
    return cli_value;
  };
  const std::vector<std::string> scales = pick_list("scales", a.scales);
  if (!scales.empty()) {
    cfg.scales.clear();
    for (const auto& s : scales) cfg.scales.push_back(std::stoi(s));
  }
  const std::vector<std::string> noises = pick_list("noises", a.noises);
  if (!noises.empty()) {
    cfg.noises.clear();
    for (const auto& s : noises) cfg.noises.push_back(std::stod(s));
  }
  const std::vector<std::string> methods = pick_list("methods", a.methods);
  if (!methods.empty()) cfg.methods = methods;

  const auto pick_int = [&](const std::string& key, int cli_value, int def) {
    if (a.flag_given(key)) return cli_value;
    if (file.has(key)) return static_cast<int>(file.get_int(key));
    return def;
  };
  cfg.iterations = pick_int("iters", a.iters, cfg.iterations);
  cfg.shift_radius = pick_int("shift_radius", a.shift_radius, cfg.shift_radius);
  cfg.crop_multiple = pick_int("crop_multiple", a.crop_multiple, cfg.crop_multiple);
  cfg.jobs = pick_int("jobs", a.jobs, 1);
  cfg.seed = a.flag_given("seed") ? a.seed
             : file.has("seed")   ? static_cast<std::uint64_t>(file.get_int("seed"))
                                  : a.seed;
  if (a.flag_given("weights"))
    cfg.weights_path = a.weights;
  else if (file.has("weights"))
    cfg.weights_path = file.get_string("weights");
  cfg.include_timing = !a.no_timing;

  std::vector<NamedKernel> kernels;
  std::string kernels_dir = a.kernels_dir;
  if (kernels_dir.empty() && file.has("kernels")) kernels_dir = file.get_string("kernels");
  if (kernels_dir.empty()) {
    kernels = benchmark_kernels();
  } else {
    for (const auto& f : list_files(kernels_dir, ".krn"))
      kernels.push_back({fs::path(f).stem().string(), load_kernel(f)});
    if (kernels.empty()) throw std::runtime_error("no .krn files in " + kernels_dir);
  }

  std::vector<std::pair<std::string, Image>> dataset;
  for (const auto& f : list_files(a.dataset, ".png"))
    dataset.emplace_back(fs::path(f).filename().string(), read_png(f));
  if (dataset.empty()) throw std::runtime_error("no PNG files in " + a.dataset);

  const BenchReport report = run_benchmark(dataset, kernels, make_standard_methods(cfg), cfg);
  for (const auto& warning : report.warnings) std::fprintf(stderr, "warning: %s\n", warning.c_str());
  write_text_file(a.out, benchrows_to_csv(report.rows, cfg.include_timing));
  std::printf("%zu rows over %zu images -> %s\n", report.rows.size(), dataset.size(), a.out.c_str());
  return 0;
}

struct DumpScheduleArgs {
  std::string out;
  double noise = 0.0;
  int scale = 2;
  int iters = 8;
  double beta_start = 49.0;
  double lambda = 1.0 / 3.0;
};

int run_dump_schedule(const DumpScheduleArgs& a) {
  const std::string csv =
      schedule_to_csv(analytic_schedule(a.noise, a.scale, a.iters, a.beta_start, a.lambda));
  if (a.out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_text_file(a.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unfolded MAP super-resolution for the classical degradation model"};
  std::ostringstream version;
  version << "unfoldsr " << kVersion << " (kernel format KRN" << kKernelFormatVersion
          << ", weights format UWT" << kWeightFormatVersion << ")";
  app.set_version_flag("--version", version.str());
  app.require_subcommand(1);

  DegradeArgs dg;
  CLI::App* degrade_cmd = app.add_subcommand("degrade", "synthesize an LR image: blur, decimate, add noise");
  degrade_cmd->add_option("--hr", dg.hr, "ground-truth HR image (PNG)")->required();
  degrade_cmd->add_option("--kernel", dg.kernel, "blur kernel (.krn)")->required();
  degrade_cmd->add_option("--scale", dg.scale, "downsampling factor")->check(CLI::Range(1, 4));
  degrade_cmd->add_option("--noise", dg.noise, "AWGN std in 0-255 units (2.55 = 1%)");
  degrade_cmd->add_option("--seed", dg.seed, "noise seed");
  degrade_cmd->add_flag("--crop", dg.crop, "center-crop the HR image to a multiple of the scale");
  degrade_cmd->add_option("--bits", dg.bits, "output bit depth")->check(CLI::IsMember({8, 16}));
  degrade_cmd->add_option("-o,--out", dg.out, "output LR PNG")->required();

  SrArgs sr;
  CLI::App* sr_cmd = app.add_subcommand("sr", "super-resolve an LR image with the unfolded solver");
  sr_cmd->add_option("--lr", sr.lr, "input LR image (PNG)")->required();
  sr_cmd->add_option("--kernel", sr.kernel, "blur kernel (.krn)")->required();
  sr_cmd->add_option("--scale", sr.scale, "upsampling factor")->check(CLI::Range(1, 4));
  sr_cmd->add_option("--noise", sr.noise, "LR noise std in 0-255 units");
  sr_cmd->add_option("--prior", sr.prior, "denoiser prior: tv, cnn, identity");
  sr_cmd->add_option("--weights", sr.weights, "ResUNet weights (.uwt) for --prior cnn");
  sr_cmd->add_option("--iters", sr.iters, "unfolded iterations K")->check(CLI::Range(1, 64));
  sr_cmd->add_option("--beta-start", sr.beta_start, "first denoiser level, 0-255 units");
  sr_cmd->add_option("--lambda", sr.lambda, "trade-off parameter of the schedule");
  sr_cmd->add_option("--c-tv", sr.c_tv, "TV weight per beta^2");
  sr_cmd->add_option("--tv-iters", sr.tv_iters, "dual projection iterations per prior step");
  sr_cmd->add_option("--trace-dir", sr.trace_dir, "write per-iteration z_k/x_k images here");
  sr_cmd->add_flag("--preprocess-boundary", sr.preprocess,
                   "boundary handling for real LR images (non-circular content)");
  sr_cmd->add_option("--dump-schedule", sr.dump_schedule, "also write the (k, alpha, beta) CSV here");
  sr_cmd->add_option("--bits", sr.bits, "output bit depth")->check(CLI::IsMember({8, 16}));
  sr_cmd->add_option("-o,--out", sr.out, "output HR PNG")->required();

  CLI::App* kernel_cmd = app.add_subcommand("kernel", "generate and inspect blur kernels");
  kernel_cmd->require_subcommand(1);
  KernelGenArgs kg;
  CLI::App* kgen = kernel_cmd->add_subcommand("gen", "generate a kernel file");
  kgen->add_option("--type", kg.type, "iso | aniso | motion | delta");
  kgen->add_option("--size", kg.size, "odd tap count per side");
  kgen->add_option("--width", kg.width, "isotropic Gaussian width");
  kgen->add_option("--sigma-x", kg.sigma_x, "anisotropic width along x");
  kgen->add_option("--sigma-y", kg.sigma_y, "anisotropic width along y");
  kgen->add_option("--theta", kg.theta, "anisotropic rotation (radians)");
  kgen->add_option("--steps", kg.steps, "motion trajectory samples");
  kgen->add_option("--seed", kg.seed, "motion seed");
  kgen->add_option("-o,--out", kg.out, "output .krn file")->required();
  std::string kshow_path;
  CLI::App* kshow = kernel_cmd->add_subcommand("show", "print kernel statistics and a tap map");
  kshow->add_option("file", kshow_path, "kernel file")->required();
  std::string kset_dir;
  CLI::App* kset = kernel_cmd->add_subcommand("gen-bench-set", "write the 12 pinned evaluation kernels");
  kset->add_option("-o,--out", kset_dir, "output directory")->required();

  EstimateArgs est;
  CLI::App* est_cmd = app.add_subcommand("estimate-bicubic-kernel",
                                         "fit the equivalent kernel of bicubic downsampling");
  est_cmd->add_option("--hr-dir", est.hr_dir, "directory of HR PNGs")->required();
  est_cmd->add_option("--scale", est.scale, "scale factor")->required()->check(CLI::Range(2, 4));
  est_cmd->add_option("--size", est.size, "kernel taps per side");
  est_cmd->add_option("--damping", est.damping, "Tikhonov damping");
  est_cmd->add_option("--max-images", est.max_images, "cap on training images (0 = all)");
  est_cmd->add_option("--report", est.report, "also write the text report here");
  est_cmd->add_option("-o,--out", est.out, "output .krn file")->required();

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "PSNR benchmark over kernels x scales x noises");
  bench_cmd->add_option("--dataset", bench.dataset, "directory of ground-truth PNGs")->required();
  bench_cmd->add_option("--config", bench.config_path, "key = value configuration file");
  bench_cmd->add_option("--scales", bench.scales, "scale grid")->delimiter(',');
  bench_cmd->add_option("--noises", bench.noises, "noise grid, 0-255 units")->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "methods to run")->delimiter(',');
  bench_cmd->add_option("--kernels", bench.kernels_dir, "directory of .krn files (default: built-in 12)");
  bench_cmd->add_option("--weights", bench.weights, "ResUNet weights, enables usr-cnn");
  bench_cmd->add_option("--seed", bench.seed, "master seed for LR synthesis");
  bench_cmd->add_option("--jobs", bench.jobs, "parallel image workers")->check(CLI::Range(1, 256));
  bench_cmd->add_option("--iters", bench.iters, "unfolded iterations K");
  bench_cmd->add_option("--shift-radius", bench.shift_radius, "PSNR shift search radius");
  bench_cmd->add_option("--crop-multiple", bench.crop_multiple, "center-crop multiple");
  bench_cmd->add_flag("--no-timing", bench.no_timing, "zero the runtime column for byte-stable CSVs");
  bench_cmd->add_option("-o,--out", bench.out, "output CSV")->required();

  DumpScheduleArgs ds;
  CLI::App* ds_cmd = app.add_subcommand("dump-schedule", "emit the analytic (k, alpha, beta) schedule");
  ds_cmd->add_option("--noise", ds.noise, "noise std in 0-255 units")->required();
  ds_cmd->add_option("--scale", ds.scale, "scale factor");
  ds_cmd->add_option("--iters", ds.iters, "iterations K");
  ds_cmd->add_option("--beta-start", ds.beta_start, "first denoiser level, 0-255 units");
  ds_cmd->add_option("--lambda", ds.lambda, "trade-off parameter");
  ds_cmd->add_option("-o,--out", ds.out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  bench.flag_given = [bench_cmd](const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return bench_cmd->count(flag) > 0;
  };

  try {
    if (degrade_cmd->parsed()) return run_degrade(dg);
    if (sr_cmd->parsed()) return run_sr(sr);
    if (kernel_cmd->parsed()) {
      if (kgen->parsed()) return run_kernel_gen(kg);
      if (kshow->parsed()) return run_kernel_show(kshow_path);
      if (kset->parsed()) return run_kernel_bench_set(kset_dir);
    }
    if (est_cmd->parsed()) return run_estimate(est);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (ds_cmd->parsed()) return run_dump_schedule(ds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
