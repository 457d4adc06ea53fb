#pragma once

#include <complex>
#include <vector>

#include "unfoldsr/fourier.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"

namespace testsupport {

using unfoldsr::Image;
using unfoldsr::Kernel;
using unfoldsr::SpectralField;

/// O(n^2) direct DFT, the reference for the fast transform.
inline SpectralField naive_dft2(const std::vector<double>& plane, int h, int w) {
  SpectralField out(h, w);
  const double tau = 2.0 * 3.14159265358979323846;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      std::complex<double> acc(0.0, 0.0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double ang = -tau * (static_cast<double>(v) * y / h + static_cast<double>(u) * x / w);
          acc += plane[static_cast<std::size_t>(y) * w + x] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      out.at(v, u) = acc;
    }
  return out;
}

/// Direct spatial circular convolution: out(i,j) = sum_k k(a,b) x(i-(a-cy), j-(b-cx)) mod dims.
inline Image circular_convolve_direct(const Image& img, const Kernel& k) {
  Image out(img.height, img.width, img.channels);
  const int cy = k.height / 2, cx = k.width / 2;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (int a = 0; a < k.height; ++a)
          for (int b = 0; b < k.width; ++b) {
            const int sy = ((y - (a - cy)) % img.height + img.height) % img.height;
            const int sx = ((x - (b - cx)) % img.width + img.width) % img.width;
            acc += k.at(a, b) * img.at(c, sy, sx);
          }
        out.at(c, y, x) = acc;
      }
  return out;
}

/// Dense degradation matrices: H is the circulant convolution matrix, S the
/// upper-left-keeping decimation matrix, both materialized entry by entry.
struct DenseOperator {
  int n = 0, m = 0;                 // HR and LR pixel counts
  std::vector<double> conv;         // n x n
  std::vector<double> decimate;     // m x n

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> hx(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = conv.data() + static_cast<std::size_t>(i) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += row[j] * x[j];
      hx[i] = acc;
    }
    std::vector<double> y(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double* row = decimate.data() + static_cast<std::size_t>(i) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += row[j] * hx[j];
      y[i] = acc;
    }
    return y;
  }

  std::vector<double> apply_adjoint(const std::vector<double>& u) const {
    std::vector<double> stu(n, 0.0);
    for (int i = 0; i < m; ++i) {
      const double* row = decimate.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) stu[j] += row[j] * u[i];
    }
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
      // H^T row j = column j of H
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += conv[static_cast<std::size_t>(i) * n + j] * stu[i];
      out[j] = acc;
    }
    return out;
  }
};

inline DenseOperator dense_degradation_operator(int h, int w, const Kernel& k, int s) {
  DenseOperator op;
  op.n = h * w;
  op.m = (h / s) * (w / s);
  op.conv.assign(static_cast<std::size_t>(op.n) * op.n, 0.0);
  op.decimate.assign(static_cast<std::size_t>(op.m) * op.n, 0.0);
  const int cy = k.height / 2, cx = k.width / 2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int row = y * w + x;
      for (int a = 0; a < k.height; ++a)
        for (int b = 0; b < k.width; ++b) {
          const int sy = ((y - (a - cy)) % h + h) % h;
          const int sx = ((x - (b - cx)) % w + w) % w;
          op.conv[static_cast<std::size_t>(row) * op.n + sy * w + sx] += k.at(a, b);
        }
    }
  const int lw = w / s;
  for (int ly = 0; ly < h / s; ++ly)
    for (int lx = 0; lx < lw; ++lx)
      op.decimate[static_cast<std::size_t>(ly * lw + lx) * op.n + (ly * s) * w + lx * s] = 1.0;
  return op;
}

inline Kernel random_kernel(int size, unfoldsr::Rng& rng, bool with_negative = true) {
  Kernel k(size, size);
  for (double& v : k.data) v = rng.next_unit() + (with_negative ? -0.3 : 0.0);
  double s = k.sum();
  if (std::abs(s) < 0.25) {
    // Re-center so normalization stays well-behaved.
    const double shift = (0.25 - s) / static_cast<double>(k.data.size());
    for (double& v : k.data) v += shift;
  }
  unfoldsr::normalize(k);
  return k;
}

}  // namespace testsupport
