#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "unfoldsr/detail/linalg.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"

namespace unfoldsr {

struct KernelEstimate {
  Kernel kernel;
  double residual_rmse = 0.0;     // RMSE of (hr (*) k) down_s against lr, after normalization
  double raw_sum = 0.0;           // tap sum before normalization
  bool ill_conditioned = false;   // HR content too flat to pin down all taps
};

/// Least-squares fit of the equivalent classical-model kernel of an arbitrary
/// linear downscaler from (HR, LR) example pairs: the map k -> (hr (*) k)
/// down_s is linear in the taps, so the argmin of the reconstruction error is
/// the solution of one (ksize^2 x ksize^2) normal-equation system accumulated
/// over every LR pixel of every pair. Circular boundary, matching degrade().
/// Tikhonov damping keeps flat patches from making the system singular.
inline KernelEstimate estimate_equivalent_kernel(
    const std::vector<std::pair<Image, Image>>& pairs, int s, int ksize = 25,
    double damping = 1e-8) {
  if (ksize < 1 || ksize % 2 == 0) throw std::invalid_argument("estimate_equivalent_kernel: ksize must be odd");
  if (s < 1) throw std::invalid_argument("estimate_equivalent_kernel: scale must be >= 1");
  if (pairs.empty()) throw std::invalid_argument("estimate_equivalent_kernel: no training pairs");

  const int n = ksize * ksize;
  const int mid = ksize / 2;
  std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  std::vector<double> phi(n);

  // Near-constant HR content cannot pin the taps down; the system degenerates
  // toward rank one. Flag it via the sample spread of the training content.
  double content_sum = 0.0, content_sq = 0.0;
  std::size_t content_n = 0;
  for (const auto& [hr, lr] : pairs) {
    for (double v : hr.data) {
      content_sum += v;
      content_sq += v * v;
    }
    content_n += hr.data.size();
  }
  const double content_mean = content_sum / static_cast<double>(content_n);
  const double content_var = content_sq / static_cast<double>(content_n) - content_mean * content_mean;

  for (const auto& [hr, lr] : pairs) {
    if (hr.channels != lr.channels) throw std::invalid_argument("estimate_equivalent_kernel: channel mismatch");
    if (hr.height != lr.height * s || hr.width != lr.width * s)
      throw std::invalid_argument("estimate_equivalent_kernel: lr is not hr/s");
    for (int c = 0; c < hr.channels; ++c)
      for (int ly = 0; ly < lr.height; ++ly)
        for (int lx = 0; lx < lr.width; ++lx) {
          // phi[a] = HR sample the tap a sees when producing this LR pixel.
          for (int ky = 0; ky < ksize; ++ky)
            for (int kx = 0; kx < ksize; ++kx) {
              const int sy = ((s * ly - (ky - mid)) % hr.height + hr.height) % hr.height;
              const int sx = ((s * lx - (kx - mid)) % hr.width + hr.width) % hr.width;
              phi[ky * ksize + kx] = hr.at(c, sy, sx);
            }
          const double target = lr.at(c, ly, lx);
          for (int i = 0; i < n; ++i) {
            const double pi = phi[i];
            rhs[i] += pi * target;
            double* row = gram.data() + static_cast<std::size_t>(i) * n;
            for (int j = i; j < n; ++j) row[j] += pi * phi[j];
          }
        }
  }
  // Mirror the accumulated upper triangle.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      gram[static_cast<std::size_t>(i) * n + j] = gram[static_cast<std::size_t>(j) * n + i];

  double max_diag = 0.0, min_diag = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) {
    const double d = gram[static_cast<std::size_t>(i) * n + i];
    max_diag = std::max(max_diag, d);
    min_diag = std::min(min_diag, d);
  }
  const bool flat = (max_diag <= 0.0) || (min_diag < 1e-10 * max_diag) || (content_var < 1e-8);

  const double ridge = damping * std::max(max_diag, 1.0);
  for (int i = 0; i < n; ++i) gram[static_cast<std::size_t>(i) * n + i] += ridge;
  detail::cholesky_solve_spd(gram, rhs, static_cast<std::size_t>(n));

  KernelEstimate est;
  est.ill_conditioned = flat;
  est.kernel = Kernel(ksize, ksize);
  est.kernel.data = rhs;
  est.raw_sum = est.kernel.sum();
  normalize(est.kernel);

  // Residual of the normalized kernel against the training pairs.
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& [hr, lr] : pairs)
    for (int c = 0; c < hr.channels; ++c)
      for (int ly = 0; ly < lr.height; ++ly)
        for (int lx = 0; lx < lr.width; ++lx) {
          double acc = 0.0;
          for (int ky = 0; ky < ksize; ++ky)
            for (int kx = 0; kx < ksize; ++kx) {
              const int sy = ((s * ly - (ky - mid)) % hr.height + hr.height) % hr.height;
              const int sx = ((s * lx - (kx - mid)) % hr.width + hr.width) % hr.width;
              acc += est.kernel.at(ky, kx) * hr.at(c, sy, sx);
            }
          const double d = acc - lr.at(c, ly, lx);
          sq += d * d;
          ++count;
        }
  est.residual_rmse = std::sqrt(sq / static_cast<double>(count));
  return est;
}

}  // namespace unfoldsr
