#pragma once

#include <stdexcept>
#include <string>

#include "unfoldsr/fourier.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/kernel.hpp"
#include "unfoldsr/rng.hpp"

namespace unfoldsr {

/// Parameters of the classical degradation y = (x (*) k) downsample_s + n.
/// sigma255 uses the 0-255 convention; [0,25] is the supported range.
struct DegradationSpec {
  int scale = 1;
  Kernel kernel;
  double sigma255 = 0.0;

  void validate() const {
    if (scale < 1 || scale > 4)
      throw std::invalid_argument("DegradationSpec: scale must be in {1,2,3,4}");
    if (sigma255 < 0.0 || sigma255 > 25.0)
      throw std::invalid_argument("DegradationSpec: sigma255 must be in [0,25]");
    if (kernel.height < 1 || kernel.width < 1)
      throw std::invalid_argument("DegradationSpec: empty kernel");
  }
};

/// Circular (periodic-boundary) convolution of every channel with the kernel,
/// via the OTF. The spatial-domain dense operator used in the tests is the
/// authority for the convention; this is its fast equivalent.
inline Image circular_convolve(const Image& img, const Kernel& k) {
  // A centered delta is an exact identity; skipping the transform keeps
  // lossless pipelines lossless to the bit.
  bool is_delta = true;
  for (int y = 0; y < k.height && is_delta; ++y)
    for (int x = 0; x < k.width && is_delta; ++x)
      is_delta = k.at(y, x) == ((y == k.height / 2 && x == k.width / 2) ? 1.0 : 0.0);
  if (is_delta && k.height <= img.height && k.width <= img.width) return img;

  const SpectralField otf = psf2otf(k, img.height, img.width);
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    SpectralField f = fft2(img, c);
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] *= otf.data[i];
    const std::vector<double> plane = ifft2(f);
    std::copy(plane.begin(), plane.end(), out.plane(c).begin());
  }
  return out;
}

/// Forward model: blur (circular), keep the upper-left pixel of each s x s
/// patch, add white Gaussian noise.
inline Image degrade(const Image& x, const DegradationSpec& spec, Rng& rng) {
  spec.validate();
  if (x.height % spec.scale != 0 || x.width % spec.scale != 0)
    throw std::invalid_argument("degrade: image dimensions (" + std::to_string(x.height) + "x" +
                                std::to_string(x.width) + ") not divisible by scale " +
                                std::to_string(spec.scale));
  const Image blurred = circular_convolve(x, spec.kernel);
  const Image low = standard_downsample(blurred, spec.scale);
  return add_awgn(low, spec.sigma255, rng);
}

}  // namespace unfoldsr
