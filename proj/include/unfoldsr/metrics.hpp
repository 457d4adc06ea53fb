#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "unfoldsr/image.hpp"

namespace unfoldsr {

/// Mean squared error over all channels jointly.
inline double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

namespace detail {

// MSE of a vs b translated by (dy,dx), restricted to the overlap.
inline double shifted_mse(const Image& a, const Image& b, int dy, int dx) {
  const int h = a.height - std::abs(dy);
  const int w = a.width - std::abs(dx);
  if (h <= 0 || w <= 0) return std::numeric_limits<double>::infinity();
  const int ay0 = std::max(0, dy), ax0 = std::max(0, dx);
  const int by0 = std::max(0, -dy), bx0 = std::max(0, -dx);
  double acc = 0.0;
  for (int c = 0; c < a.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d = a.at(c, ay0 + y, ax0 + x) - b.at(c, by0 + y, bx0 + x);
        acc += d * d;
      }
  return acc / (static_cast<double>(h) * w * a.channels);
}

}  // namespace detail

/// PSNR in dB with MAX = 1. When shift_radius > 0, the result is maximised
/// over integer translations (dy,dx) in [-r,r]^2, evaluated on the overlap;
/// this compensates the small spatial shifts blur kernels induce. A zero MSE
/// yields +infinity.
inline double psnr(const Image& a, const Image& b, int shift_radius = 0) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  if (shift_radius < 0) throw std::invalid_argument("psnr: negative shift radius");
  double best = std::numeric_limits<double>::infinity();
  for (int dy = -shift_radius; dy <= shift_radius; ++dy)
    for (int dx = -shift_radius; dx <= shift_radius; ++dx)
      best = std::min(best, detail::shifted_mse(a, b, dy, dx));
  if (best == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / best);
}

}  // namespace unfoldsr
