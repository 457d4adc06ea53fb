#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"

namespace unfoldsr {

/// Complex frequency-domain array. Unnormalized forward convention: the
/// inverse transform carries the 1/(HW) factor.
struct SpectralField {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> data;

  SpectralField() = default;
  SpectralField(int h, int w)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w) {
    if (h < 1 || w < 1) throw std::invalid_argument("SpectralField: bad dimensions");
  }

  std::complex<double>& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::complex<double> at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

namespace detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey, n a power of two. sign=-1 forward.
inline void fft_pow2(cplx* a, std::size_t n, int sign) {
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cplx u = a[i + j];
        const cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein chirp-z for arbitrary n, expressed through a pow2 convolution.
// The quadratic phase exponent is reduced mod 2n to keep the angle small.
inline void fft_bluestein(cplx* a, std::size_t n, int sign) {
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cplx> chirp(n), fa(m, cplx(0, 0)), fb(m, cplx(0, 0));
  const double base = sign * 3.14159265358979323846 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t e = (k * k) % (2 * n);
    chirp[k] = cplx(std::cos(base * static_cast<double>(e)), std::sin(base * static_cast<double>(e)));
  }
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
  fft_pow2(fa.data(), m, -1);
  fft_pow2(fb.data(), m, -1);
  for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
  fft_pow2(fa.data(), m, +1);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * chirp[k];
}

inline void fft_1d(cplx* a, std::size_t n, int sign) {
  if (n == 1) return;
  if (is_pow2(n))
    fft_pow2(a, n, sign);
  else
    fft_bluestein(a, n, sign);
}

// In-place 2-D transform of row-major data. sign=-1 forward, +1 unscaled
// inverse (caller divides by HW).
inline void fft_2d(cplx* data, int h, int w, int sign) {
  for (int y = 0; y < h; ++y) fft_1d(data + static_cast<std::size_t>(y) * w, w, sign);
  std::vector<cplx> col(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = data[static_cast<std::size_t>(y) * w + x];
    fft_1d(col.data(), h, sign);
    for (int y = 0; y < h; ++y) data[static_cast<std::size_t>(y) * w + x] = col[y];
  }
}

}  // namespace detail

inline SpectralField fft2(std::span<const double> plane, int h, int w) {
  if (h < 1 || w < 1) throw std::invalid_argument("fft2: bad dimensions");
  if (plane.size() != static_cast<std::size_t>(h) * w) throw std::invalid_argument("fft2: size mismatch");
  SpectralField f(h, w);
  for (std::size_t i = 0; i < plane.size(); ++i) f.data[i] = plane[i];
  detail::fft_2d(f.data.data(), h, w, -1);
  return f;
}

inline SpectralField fft2(const Image& img, int channel) {
  return fft2(img.plane(channel), img.height, img.width);
}

/// Inverse 2-D transform. The result of a well-formed pipeline is real up to
/// rounding; a large imaginary residue indicates a conjugate-symmetry bug
/// upstream, so it is checked (threshold 1e-8 relative) before discarding.
inline std::vector<double> ifft2(const SpectralField& f) {
  std::vector<std::complex<double>> buf = f.data;
  detail::fft_2d(buf.data(), f.height, f.width, +1);
  const double inv = 1.0 / (static_cast<double>(f.height) * f.width);
  double max_abs = 0.0, max_imag = 0.0;
  for (auto& v : buf) {
    v *= inv;
    max_abs = std::max(max_abs, std::abs(v.real()));
    max_imag = std::max(max_imag, std::abs(v.imag()));
  }
  if (max_imag > 1e-8 * std::max(max_abs, 1e-30))
    throw std::runtime_error("ifft2: imaginary residue exceeds 1e-8 relative; "
                             "upstream spectrum is not conjugate-symmetric");
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

/// OTF of a PSF on an h x w grid: kernel embedded at the origin, circularly
/// shifted so its center tap (floor(kh/2), floor(kw/2)) sits at (0,0), then
/// transformed. Multiplying spectra by the result equals circular spatial
/// convolution with the kernel.
inline SpectralField psf2otf(const Kernel& k, int h, int w) {
  if (k.height > h || k.width > w)
    throw std::invalid_argument("psf2otf: kernel larger than target grid");
  std::vector<double> grid(static_cast<std::size_t>(h) * w, 0.0);
  const int cy = k.height / 2, cx = k.width / 2;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      const int ty = ((y - cy) % h + h) % h;
      const int tx = ((x - cx) % w + w) % w;
      grid[static_cast<std::size_t>(ty) * w + tx] = k.at(y, x);
    }
  return fft2(grid, h, w);
}

/// Mean of the s x s contiguous tiles: the field is an (sH)x(sW) grid of
/// H x W blocks, block (p,q) spanning rows pH..(p+1)H-1 and cols qW..(q+1)W-1;
/// the result is their element-wise average. This is the spectral image of
/// s-fold decimation (aliasing sum).
inline SpectralField block_downsample(const SpectralField& f, int s) {
  if (s < 1) throw std::invalid_argument("block_downsample: scale must be >= 1");
  if (f.height % s != 0 || f.width % s != 0)
    throw std::invalid_argument("block_downsample: dimensions not divisible by scale");
  if (s == 1) return f;
  const int h = f.height / s, w = f.width / s;
  SpectralField out(h, w);
  for (int p = 0; p < s; ++p)
    for (int q = 0; q < s; ++q)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          out.at(y, x) += f.at(p * h + y, q * w + x);
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (auto& v : out.data) v *= inv;
  return out;
}

/// Multiply each contiguous H x W tile of f (sized sH x sW) element-wise by g
/// (sized H x W).
inline SpectralField block_multiply(const SpectralField& f, const SpectralField& g, int s) {
  if (s < 1) throw std::invalid_argument("block_multiply: scale must be >= 1");
  if (f.height != g.height * s || f.width != g.width * s)
    throw std::invalid_argument("block_multiply: dimension mismatch");
  SpectralField out(f.height, f.width);
  for (int y = 0; y < f.height; ++y) {
    const int gy = y % g.height;
    for (int x = 0; x < f.width; ++x)
      out.at(y, x) = f.at(y, x) * g.at(gy, x % g.width);
  }
  return out;
}

}  // namespace unfoldsr
