#pragma once

#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "unfoldsr/data_step.hpp"
#include "unfoldsr/degradation.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/prior.hpp"
#include "unfoldsr/resample.hpp"
#include "unfoldsr/schedule.hpp"

namespace unfoldsr {

struct SolveOptions {
  bool keep_trace = false;   // retain z_k / x_k pairs (2K HR images)
};

struct SolveResult {
  Image output;                // x_K clamped to [0,1]
  std::vector<Image> trace;    // z_1, x_1, z_2, x_2, ... when requested
};

/// The unfolded loop: x_0 = nearest-neighbor upsample of y, then K rounds of
/// the closed-form data step followed by the denoiser prior,
///   z_k = D(x_{k-1}, s, k, y, alpha_k),  x_k = P(z_k, beta_k).
/// Intermediate estimates are never clamped; only the returned output is.
inline SolveResult unfold_sr(const Image& y, const DegradationSpec& spec,
                             const DenoiserPrior& prior, const HyperSchedule& schedule,
                             const SolveOptions& opts = {}) {
  spec.validate();
  schedule.validate();
  const DataStepSolver solver(y, spec.kernel, spec.scale);

  SolveResult result;
  Image x = nearest_upsample(y, spec.scale);
  for (int k = 0; k < schedule.iterations(); ++k) {
    Image z = solver.step(x, schedule.alphas[k]);
    x = prior.denoise(z, schedule.betas[k]);
    if (x.height != z.height || x.width != z.width || x.channels != z.channels)
      throw std::runtime_error("unfold_sr: prior changed image dimensions");
    if (opts.keep_trace) {
      result.trace.push_back(std::move(z));
      result.trace.push_back(x);
    }
  }
  result.output = clamp01(x);
  return result;
}

/// Edge-taper: blend an image with its circularly blurred version, weighted
/// by a window built from the autocorrelation of the kernel's axis
/// projections. The window is 1 in the interior and sinks toward 0 within a
/// kernel-radius band of the borders, which suppresses the wrap-around seam
/// that circular convolution would otherwise see.
inline Image edgetaper(const Image& img, const Kernel& kernel) {
  if (kernel.height >= img.height || kernel.width >= img.width)
    throw std::invalid_argument("edgetaper: kernel must be smaller than the image");
  if (kernel.height == 1 && kernel.width == 1) return img;

  // Circular autocorrelation of a projection, laid out on the image axis and
  // normalized to peak 1 at lag 0.
  const auto taper_profile = [](const std::vector<double>& proj, int n) {
    const int k = static_cast<int>(proj.size());
    std::vector<double> acf(n, 0.0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const int lag = ((a - b) % n + n) % n;
        acf[lag] += proj[a] * proj[b];
      }
    const double peak = acf[0];
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      const double v = 1.0 - acf[i] / peak;
      w[i] = std::clamp(v, 0.0, 1.0);
    }
    return w;
  };

  std::vector<double> proj_y(kernel.height, 0.0), proj_x(kernel.width, 0.0);
  for (int y = 0; y < kernel.height; ++y)
    for (int x = 0; x < kernel.width; ++x) {
      proj_y[y] += kernel.at(y, x);
      proj_x[x] += kernel.at(y, x);
    }
  const std::vector<double> wy = taper_profile(proj_y, img.height);
  const std::vector<double> wx = taper_profile(proj_x, img.width);

  const Image blurred = circular_convolve(img, kernel);
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const double w = wy[y] * wx[x];
        out.at(c, y, x) = w * img.at(c, y, x) + (1.0 - w) * blurred.at(c, y, x);
      }
  return out;
}

/// LR-space margins the boundary pre-processing adds on each side.
inline std::pair<int, int> boundary_margins(const Kernel& kernel, int s) {
  return {(kernel.height + 2 * s - 1) / (2 * s), (kernel.width + 2 * s - 1) / (2 * s)};
}

/// Boundary pre-processing for real LR images, whose content is not
/// circularly consistent the way synthetic inputs are:
///   1. replicate-pad y and interpolate it to HR size (sample-aligned
///      bicubic, so decimation inverts it exactly),
///   2. edge-taper the interpolated image with the blur kernel,
///   3. decimate the tapered image and keep its border band as padding
///      around the untouched original y.
/// The solver runs on the enlarged LR image and the padding (margins *
/// scale in HR pixels) is cropped from the result.
inline Image preprocess_real_lr(const Image& y, const Kernel& kernel, int s) {
  if (s < 1) throw std::invalid_argument("preprocess_real_lr: scale must be >= 1");
  const auto [mv, mh] = boundary_margins(kernel, s);
  const Image padded = replicate_pad(y, mv, mv, mh, mh);
  const Image hr = bicubic_upsample(padded, s);
  const Image tapered = edgetaper(hr, kernel);
  Image out = standard_downsample(tapered, s);
  // Interior stays the original y verbatim.
  for (int c = 0; c < y.channels; ++c)
    for (int yy = 0; yy < y.height; ++yy)
      for (int xx = 0; xx < y.width; ++xx)
        out.at(c, yy + mv, xx + mh) = y.at(c, yy, xx);
  return out;
}

/// Convenience wrapper: pre-process, solve, crop the padding back off.
inline Image solve_with_boundary_handling(const Image& y, const DegradationSpec& spec,
                                          const DenoiserPrior& prior,
                                          const HyperSchedule& schedule) {
  const auto [mv, mh] = boundary_margins(spec.kernel, spec.scale);
  const Image padded = preprocess_real_lr(y, spec.kernel, spec.scale);
  const SolveResult res = unfold_sr(padded, spec, prior, schedule);
  return crop(res.output, mv * spec.scale, mh * spec.scale,
              y.height * spec.scale, y.width * spec.scale);
}

}  // namespace unfoldsr
