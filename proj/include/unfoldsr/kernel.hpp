#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "unfoldsr/rng.hpp"

namespace unfoldsr {

/// 2-D point spread function. Weights sum to 1 (normalized PSF) but may be
/// negative: equivalent kernels of bicubic-style resamplers have negative
/// lobes.
struct Kernel {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Kernel() = default;
  Kernel(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {
    if (h < 1 || w < 1) throw std::invalid_argument("Kernel: bad dimensions");
  }

  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

  double sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
  }
};

inline void normalize(Kernel& k) {
  const double s = k.sum();
  if (s == 0.0) throw std::invalid_argument("normalize: kernel sums to zero");
  for (double& v : k.data) v /= s;
}

inline Kernel delta_kernel(int size = 1) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("delta_kernel: size must be odd");
  Kernel k(size, size, 0.0);
  k.at(size / 2, size / 2) = 1.0;
  return k;
}

/// Centroid of the weights in tap coordinates (row, col).
inline std::pair<double, double> kernel_center_of_mass(const Kernel& k) {
  const double s = k.sum();
  if (s == 0.0) throw std::invalid_argument("kernel_center_of_mass: zero-sum kernel");
  double ry = 0.0, rx = 0.0;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      ry += k.at(y, x) * y;
      rx += k.at(y, x) * x;
    }
  return {ry / s, rx / s};
}

/// Bivariate Gaussian sampled at the taps, covariance R diag(sx^2, sy^2) R^T
/// with R the rotation by theta, centered on the middle tap, sum normalized
/// to 1. sigma_x is the std along the (pre-rotation) x axis in pixels.
inline Kernel gaussian_kernel(int size, double sigma_x, double sigma_y, double theta = 0.0) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian_kernel: size must be odd");
  if (sigma_x <= 0 || sigma_y <= 0) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  const double c = std::cos(theta), s = std::sin(theta);
  // Inverse covariance of R diag(sx^2, sy^2) R^T.
  const double ixx = c * c / (sigma_x * sigma_x) + s * s / (sigma_y * sigma_y);
  const double iyy = s * s / (sigma_x * sigma_x) + c * c / (sigma_y * sigma_y);
  const double ixy = c * s * (1.0 / (sigma_x * sigma_x) - 1.0 / (sigma_y * sigma_y));
  const int mid = size / 2;
  Kernel k(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dx = x - mid, dy = y - mid;
      k.at(y, x) = std::exp(-0.5 * (ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy));
    }
  normalize(k);
  return k;
}

/// Random motion blur: an inertial random walk in velocity space, rasterized
/// with bilinear splatting. Bilinear splatting preserves total mass and the
/// first moment, so after the trajectory is translated to put its centroid on
/// the middle tap, the rasterized center of mass lands there too (clipping at
/// the borders is avoided by rescaling the trajectory to fit).
inline Kernel motion_kernel(int size, int steps, Rng& rng) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("motion_kernel: size must be odd");
  if (steps < 1) throw std::invalid_argument("motion_kernel: steps must be >= 1");
  const double mid = size / 2;

  std::vector<double> py(steps), px(steps);
  double y = 0.0, x = 0.0, vy = 0.0, vx = 0.0;
  const double inertia = 0.9, kick = 0.35;
  for (int i = 0; i < steps; ++i) {
    py[i] = y;
    px[i] = x;
    vy = inertia * vy + kick * rng.next_gaussian();
    vx = inertia * vx + kick * rng.next_gaussian();
    y += vy;
    x += vx;
  }

  // Center the trajectory on the middle tap and shrink it if it would clip.
  double cy = 0.0, cx = 0.0;
  for (int i = 0; i < steps; ++i) {
    cy += py[i];
    cx += px[i];
  }
  cy /= steps;
  cx /= steps;
  double extent = 0.0;
  for (int i = 0; i < steps; ++i) {
    extent = std::max(extent, std::abs(py[i] - cy));
    extent = std::max(extent, std::abs(px[i] - cx));
  }
  const double limit = mid - 1.0;
  const double scale = (extent > limit && extent > 0.0) ? limit / extent : 1.0;

  Kernel k(size, size, 0.0);
  for (int i = 0; i < steps; ++i) {
    const double fy = mid + scale * (py[i] - cy);
    const double fx = mid + scale * (px[i] - cx);
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const double wy = fy - y0, wx = fx - x0;
    k.at(y0, x0) += (1 - wy) * (1 - wx);
    k.at(y0, x0 + 1) += (1 - wy) * wx;
    k.at(y0 + 1, x0) += wy * (1 - wx);
    k.at(y0 + 1, x0 + 1) += wy * wx;
  }
  normalize(k);
  return k;
}

// ---- Kernel file format: "KRN1", uint32 h, uint32 w, h*w float64, all
// ---- little-endian, row-major.

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

inline std::string kernel_to_bytes(const Kernel& k) {
  std::string out = "KRN1";
  detail::put_u32_le(out, static_cast<std::uint32_t>(k.height));
  detail::put_u32_le(out, static_cast<std::uint32_t>(k.width));
  for (double v : k.data) detail::put_f64_le(out, v);
  return out;
}

inline Kernel kernel_from_bytes(const std::string& bytes, const std::string& origin = "<memory>") {
  if (bytes.size() < 12 || bytes.compare(0, 4, "KRN1") != 0)
    throw std::runtime_error("not a KRN1 kernel file: " + origin);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t h = detail::get_u32_le(p + 4);
  const std::uint32_t w = detail::get_u32_le(p + 8);
  if (h == 0 || w == 0 || h > 4096 || w > 4096)
    throw std::runtime_error("kernel file has implausible dimensions: " + origin);
  const std::size_t expected = 12 + static_cast<std::size_t>(h) * w * 8;
  if (bytes.size() != expected)
    throw std::runtime_error("kernel file truncated or oversized: " + origin);
  Kernel k(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < k.data.size(); ++i)
    k.data[i] = detail::get_f64_le(p + 12 + i * 8);
  for (double v : k.data)
    if (!std::isfinite(v)) throw std::runtime_error("kernel file contains non-finite taps: " + origin);
  if (std::abs(k.sum() - 1.0) > 1e-6)
    throw std::runtime_error("kernel weights do not sum to 1: " + origin);
  return k;
}

inline void save_kernel(const std::string& path, const Kernel& k) {
  detail::write_file_bytes(path, kernel_to_bytes(k));
}

inline Kernel load_kernel(const std::string& path) {
  return kernel_from_bytes(detail::read_file_bytes(path), path);
}

}  // namespace unfoldsr
