#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "unfoldsr/detail/linalg.hpp"
#include "unfoldsr/fourier.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"

namespace unfoldsr {

// The closed form divides by alpha, so the data module floors it at 1e-6
// (the same guard the hyper-parameter module applies to its outputs).
// Anything below 1e-12 indicates a broken caller and is rejected outright.
inline double guarded_alpha(double alpha) {
  if (alpha < 1e-12)
    throw std::invalid_argument("data step: alpha below the 1e-12 division guard");
  return alpha < 1e-6 ? 1e-6 : alpha;
}

/// Arguments of one data-consistency step: find the HR image z minimizing
///   || y - (z (*) k) down_s ||^2 + alpha * || z - x_prev ||^2
/// under circular boundary conditions.
struct DataStepInput {
  Image x_prev;   // HR-sized anchor, s times the LR dimensions
  Image y;        // LR observation
  Kernel kernel;
  int scale = 1;
  double alpha = 1.0;

  void validate() const {
    if (scale < 1) throw std::invalid_argument("DataStepInput: scale must be >= 1");
    if (x_prev.channels != y.channels) throw std::invalid_argument("DataStepInput: channel mismatch");
    if (x_prev.height != y.height * scale || x_prev.width != y.width * scale)
      throw std::invalid_argument("DataStepInput: x_prev must be scale times y");
    if (alpha < 1e-12) throw std::invalid_argument("DataStepInput: alpha below the 1e-12 division guard");
  }
};

/// Precomputes everything about (y, k, s) that the closed form reuses across
/// iterations; step() then costs two transforms per channel.
///
/// The solution in the spectral domain, with FK the OTF of k, is
///   d  = conj(FK) . F(y up_s) + alpha F(x_prev)
///   z  = F^-1( (d - conj(FK) tile_mult [ (FK d) tile_mean / (|FK|^2 tile_mean + alpha) ]) / alpha )
/// where tile_mean averages the s x s contiguous LR-sized tiles and tile_mult
/// multiplies every tile by the LR-sized factor. The tile identities hold
/// because F(y up_s) is tile-periodic and tile_mean is the spectral image of
/// s-fold decimation.
class DataStepSolver {
 public:
  DataStepSolver(const Image& y, const Kernel& kernel, int scale)
      : scale_(scale), lr_h_(y.height), lr_w_(y.width), channels_(y.channels) {
    if (scale < 1) throw std::invalid_argument("DataStepSolver: scale must be >= 1");
    const int h = y.height * scale, w = y.width * scale;
    otf_ = psf2otf(kernel, h, w);
    otf_sq_lr_ = block_downsample(hadamard_conj_self(otf_), scale);
    const Image up = zero_upsample(y, scale);
    data_term_.reserve(y.channels);
    for (int c = 0; c < y.channels; ++c) {
      SpectralField f = fft2(up, c);
      for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = std::conj(otf_.data[i]) * f.data[i];
      data_term_.push_back(std::move(f));
    }
  }

  Image step(const Image& x_prev, double alpha) const {
    if (x_prev.channels != channels_ || x_prev.height != lr_h_ * scale_ || x_prev.width != lr_w_ * scale_)
      throw std::invalid_argument("DataStepSolver: x_prev has wrong shape");
    alpha = guarded_alpha(alpha);
    Image out(x_prev.height, x_prev.width, channels_);
    for (int c = 0; c < channels_; ++c) {
      SpectralField d = fft2(x_prev, c);
      for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = data_term_[c].data[i] + alpha * d.data[i];

      SpectralField num(d.height, d.width);
      for (std::size_t i = 0; i < d.data.size(); ++i) num.data[i] = otf_.data[i] * d.data[i];
      SpectralField small = block_downsample(num, scale_);
      for (std::size_t i = 0; i < small.data.size(); ++i)
        small.data[i] /= otf_sq_lr_.data[i] + alpha;

      const SpectralField corr = block_multiply(conj(otf_), small, scale_);
      for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = (d.data[i] - corr.data[i]) / alpha;
      const std::vector<double> plane = ifft2(d);
      std::copy(plane.begin(), plane.end(), out.plane(c).begin());
    }
    return out;
  }

 private:
  static SpectralField hadamard_conj_self(const SpectralField& f) {
    SpectralField out(f.height, f.width);
    for (std::size_t i = 0; i < f.data.size(); ++i) out.data[i] = std::norm(f.data[i]);
    return out;
  }

  static SpectralField conj(const SpectralField& f) {
    SpectralField out(f.height, f.width);
    for (std::size_t i = 0; i < f.data.size(); ++i) out.data[i] = std::conj(f.data[i]);
    return out;
  }

  int scale_, lr_h_, lr_w_, channels_;
  SpectralField otf_;
  SpectralField otf_sq_lr_;                // |FK|^2 tile-averaged, real values
  std::vector<SpectralField> data_term_;   // conj(FK) . F(y up_s), per channel
};

/// One-shot form of the closed-form data step.
inline Image data_step(const DataStepInput& in) {
  in.validate();
  return DataStepSolver(in.y, in.kernel, in.scale).step(in.x_prev, in.alpha);
}

/// Brute-force reference for data_step: materialize the degradation operator
/// A = S H (S keeps the upper-left pixel of each s x s patch, H is the
/// circulant convolution matrix) row by row and solve the normal equations
///   (A^T A + alpha I) z = A^T y + alpha x_prev
/// with a dense symmetric factorization. Capped at 32 x 32 HR grids.
inline Image data_step_oracle(const DataStepInput& in_raw) {
  in_raw.validate();
  DataStepInput in = in_raw;
  in.alpha = guarded_alpha(in.alpha);
  const int h = in.x_prev.height, w = in.x_prev.width, s = in.scale;
  if (h > 32 || w > 32) throw std::invalid_argument("data_step_oracle: HR grid larger than 32x32");
  const int n = h * w;
  const int lh = h / s, lw = w / s;
  const int m = lh * lw;
  const Kernel& k = in.kernel;
  const int cy = k.height / 2, cx = k.width / 2;

  // Rows of A: LR pixel (ly,lx) sees HR pixel ((s*ly - (ky-cy)) mod h, ...).
  std::vector<std::vector<std::pair<int, double>>> rows(m);
  for (int ly = 0; ly < lh; ++ly)
    for (int lx = 0; lx < lw; ++lx) {
      auto& row = rows[ly * lw + lx];
      row.reserve(static_cast<std::size_t>(k.height) * k.width);
      for (int ky = 0; ky < k.height; ++ky)
        for (int kx = 0; kx < k.width; ++kx) {
          const int sy = ((s * ly - (ky - cy)) % h + h) % h;
          const int sx = ((s * lx - (kx - cx)) % w + w) % w;
          row.emplace_back(sy * w + sx, k.at(ky, kx));
        }
    }

  // A^T A + alpha I, accumulated once and shared by all channels.
  std::vector<double> normal(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& row : rows)
    for (const auto& [i, vi] : row)
      for (const auto& [j, vj] : row)
        normal[static_cast<std::size_t>(i) * n + j] += vi * vj;
  for (int i = 0; i < n; ++i) normal[static_cast<std::size_t>(i) * n + i] += in.alpha;

  Image out(h, w, in.x_prev.channels);
  for (int c = 0; c < in.x_prev.channels; ++c) {
    std::vector<double> rhs(in.x_prev.plane(c).begin(), in.x_prev.plane(c).end());
    for (double& v : rhs) v *= in.alpha;
    for (int r = 0; r < m; ++r) {
      const double yv = in.y.plane(c)[r];
      for (const auto& [i, vi] : rows[r]) rhs[i] += vi * yv;
    }
    std::vector<double> lhs = normal;
    detail::cholesky_solve_spd(lhs, rhs, static_cast<std::size_t>(n));
    std::copy(rhs.begin(), rhs.end(), out.plane(c).begin());
  }
  return out;
}

/// Deblurring special case (s = 1) written in its familiar Wiener-like form:
///   z = F^-1( (conj(FK) F(y) + alpha F(x_anchor)) / (|FK|^2 + alpha) ).
/// Must agree with data_step at scale 1; the two are algebraically identical.
inline Image wiener_deblur(const Image& y, const Kernel& kernel, double alpha, const Image& x_anchor) {
  if (!y.same_shape(x_anchor)) throw std::invalid_argument("wiener_deblur: shape mismatch");
  alpha = guarded_alpha(alpha);
  const SpectralField otf = psf2otf(kernel, y.height, y.width);
  Image out(y.height, y.width, y.channels);
  for (int c = 0; c < y.channels; ++c) {
    const SpectralField fy = fft2(y, c);
    const SpectralField fx = fft2(x_anchor, c);
    SpectralField z(y.height, y.width);
    for (std::size_t i = 0; i < z.data.size(); ++i)
      z.data[i] = (std::conj(otf.data[i]) * fy.data[i] + alpha * fx.data[i]) /
                  (std::norm(otf.data[i]) + alpha);
    const std::vector<double> plane = ifft2(z);
    std::copy(plane.begin(), plane.end(), out.plane(c).begin());
  }
  return out;
}

}  // namespace unfoldsr
