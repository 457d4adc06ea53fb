#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/rng.hpp"

namespace unfoldsr {

/// Multi-channel raster of real-valued samples, planar layout (row-major per
/// channel). Intensities nominally live in [0,1] but are allowed to leave
/// that range while the solver iterates; clamping happens at export only.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || c < 1) throw std::invalid_argument("Image: bad dimensions");
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return plane_size() * channels; }

  double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

inline bool all_finite(const Image& img) {
  for (double v : img.data)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Replicate each pixel into an s x s block. Output pixel (i,j) takes the
/// value of input pixel (i/s, j/s).
inline Image nearest_upsample(const Image& img, int s) {
  if (s < 1) throw std::invalid_argument("nearest_upsample: scale must be >= 1");
  if (s == 1) return img;
  Image out(img.height * s, img.width * s, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = img.at(c, y / s, x / s);
  return out;
}

/// Keep the upper-left pixel of each distinct s x s patch.
inline Image standard_downsample(const Image& img, int s) {
  if (s < 1) throw std::invalid_argument("standard_downsample: scale must be >= 1");
  if (img.height % s != 0 || img.width % s != 0)
    throw std::invalid_argument("standard_downsample: dimensions (" + std::to_string(img.height) + "x" +
                                std::to_string(img.width) + ") not divisible by scale " + std::to_string(s));
  if (s == 1) return img;
  Image out(img.height / s, img.width / s, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = img.at(c, y * s, x * s);
  return out;
}

/// Adjoint of standard_downsample: place samples on the s-strided lattice,
/// zeros elsewhere.
inline Image zero_upsample(const Image& img, int s) {
  if (s < 1) throw std::invalid_argument("zero_upsample: scale must be >= 1");
  if (s == 1) return img;
  Image out(img.height * s, img.width * s, img.channels, 0.0);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(c, y * s, x * s) = img.at(c, y, x);
  return out;
}

/// Additive white Gaussian noise. sigma255 follows the 0-255 convention used
/// throughout the CLI (2.55 = 1%); internally it is divided by 255.
inline Image add_awgn(const Image& img, double sigma255, Rng& rng) {
  if (sigma255 < 0) throw std::invalid_argument("add_awgn: sigma must be >= 0");
  if (sigma255 == 0.0) return img;
  const double sigma = sigma255 / 255.0;
  Image out = img;
  for (double& v : out.data) v += sigma * rng.next_gaussian();
  return out;
}

inline Image clamp01(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

inline Image crop(const Image& img, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || y0 + h > img.height || x0 + w > img.width)
    throw std::invalid_argument("crop: window out of bounds");
  Image out(h, w, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

inline Image center_crop_to_multiple(const Image& img, int multiple) {
  const int h = (img.height / multiple) * multiple;
  const int w = (img.width / multiple) * multiple;
  if (h == 0 || w == 0)
    throw std::invalid_argument("center_crop_to_multiple: image smaller than multiple");
  return crop(img, (img.height - h) / 2, (img.width - w) / 2, h, w);
}

inline Image replicate_pad(const Image& img, int top, int bottom, int left, int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0)
    throw std::invalid_argument("replicate_pad: negative margin");
  Image out(img.height + top + bottom, img.width + left + right, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < out.height; ++y) {
      const int sy = std::clamp(y - top, 0, img.height - 1);
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = img.at(c, sy, std::clamp(x - left, 0, img.width - 1));
    }
  return out;
}

}  // namespace unfoldsr
