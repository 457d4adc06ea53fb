#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "unfoldsr/image.hpp"

namespace unfoldsr {

/// Keys cubic interpolation kernel with a = -0.5 (Catmull-Rom), support
/// [-2, 2].
inline double keys_cubic(double t) {
  const double a = -0.5;
  t = std::abs(t);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
  return 0.0;
}

namespace detail {

// Weights of one output sample against the source row. Anti-aliased bicubic
// downsampling stretches the kernel by s: w(j) = keys((j - center)/s)/s,
// support 4s taps. The per-residue partition of unity of the Keys kernel
// makes each weight set sum to exactly 1.
struct TapSet {
  int first = 0;
  std::vector<double> weights;
};

inline TapSet bicubic_taps(double center, int stretch) {
  const double support = 2.0 * stretch;
  const int first = static_cast<int>(std::ceil(center - support));
  const int last = static_cast<int>(std::floor(center + support));
  TapSet taps;
  taps.first = first;
  taps.weights.resize(static_cast<std::size_t>(last - first + 1));
  for (int j = first; j <= last; ++j)
    taps.weights[static_cast<std::size_t>(j - first)] = keys_cubic((j - center) / stretch) / stretch;
  return taps;
}

inline Image bicubic_down_rows(const Image& in, int out_w, double offset, int s) {
  std::vector<TapSet> taps(out_w);
  for (int i = 0; i < out_w; ++i) taps[i] = bicubic_taps(s * i + offset, s);
  Image out(in.height, out_w, in.channels);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < out_w; ++x) {
        const TapSet& t = taps[x];
        double acc = 0.0;
        for (std::size_t j = 0; j < t.weights.size(); ++j) {
          const int src = ((t.first + static_cast<int>(j)) % in.width + in.width) % in.width;
          acc += t.weights[j] * in.at(c, y, src);
        }
        out.at(c, y, x) = acc;
      }
  return out;
}

inline Image bicubic_down_cols(const Image& in, int out_h, double offset, int s) {
  std::vector<TapSet> taps(out_h);
  for (int i = 0; i < out_h; ++i) taps[i] = bicubic_taps(s * i + offset, s);
  Image out(out_h, in.width, in.channels);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < out_h; ++y) {
      const TapSet& t = taps[y];
      for (int x = 0; x < in.width; ++x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < t.weights.size(); ++j) {
          const int src = ((t.first + static_cast<int>(j)) % in.height + in.height) % in.height;
          acc += t.weights[j] * in.at(c, src, x);
        }
        out.at(c, y, x) = acc;
      }
    }
  return out;
}

}  // namespace detail

/// Anti-aliased bicubic downsampling (Keys a=-0.5, kernel stretched by s),
/// circular boundary. Output pixel i maps to input coordinate s*i + (s-1)/2;
/// relative to the upper-left-keeping decimator this grid offset is what
/// shifts the equivalent kernels by (s-1)/2 taps toward the upper left.
inline Image bicubic_downsample(const Image& img, int s) {
  if (s < 2 || s > 4) throw std::invalid_argument("bicubic_downsample: scale must be in {2,3,4}");
  if (img.height % s != 0 || img.width % s != 0)
    throw std::invalid_argument("bicubic_downsample: dimensions not divisible by scale");
  const double offset = (s - 1) / 2.0;
  const Image tmp = detail::bicubic_down_rows(img, img.width / s, offset, s);
  return detail::bicubic_down_cols(tmp, img.height / s, offset, s);
}

/// Bicubic upsampling on the sample-aligned grid: output pixel I maps to
/// input coordinate I/s, so standard_downsample(bicubic_upsample(x, s), s)
/// reproduces x exactly (the Keys kernel interpolates). Replicate boundary.
inline Image bicubic_upsample(const Image& img, int s) {
  if (s < 1) throw std::invalid_argument("bicubic_upsample: scale must be >= 1");
  if (s == 1) return img;
  Image out(img.height * s, img.width * s, img.channels);
  // The s distinct fractional phases and their 4-tap weight rows.
  std::vector<std::array<double, 4>> phase(s);
  for (int r = 0; r < s; ++r) {
    const double frac = static_cast<double>(r) / s;
    for (int j = -1; j <= 2; ++j) phase[r][j + 1] = keys_cubic(frac - j);
  }
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

  Image tmp(img.height, out.width, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int X = 0; X < out.width; ++X) {
        const int base = X / s, r = X % s;
        double acc = 0.0;
        for (int j = -1; j <= 2; ++j)
          acc += phase[r][j + 1] * img.at(c, y, clampi(base + j, img.width - 1));
        tmp.at(c, y, X) = acc;
      }
  for (int c = 0; c < img.channels; ++c)
    for (int Y = 0; Y < out.height; ++Y) {
      const int base = Y / s, r = Y % s;
      for (int X = 0; X < out.width; ++X) {
        double acc = 0.0;
        for (int j = -1; j <= 2; ++j)
          acc += phase[r][j + 1] * tmp.at(c, clampi(base + j, img.height - 1), X);
        out.at(c, Y, X) = acc;
      }
    }
  return out;
}

}  // namespace unfoldsr
