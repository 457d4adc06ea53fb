#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/image.hpp"

namespace unfoldsr {

/// A denoiser prior: maps an HR estimate and a noise level beta (in [0,1]
/// units) to a cleaner image of the same shape. Implementations never see the
/// blur kernel or scale factor; degradation removal is the data step's job
/// and the two stay decoupled.
class DenoiserPrior {
 public:
  virtual ~DenoiserPrior() = default;
  virtual std::string name() const = 0;
  virtual Image denoise(const Image& z, double beta) const = 0;
};

namespace detail {

// Forward-difference gradient with Neumann boundary; div is its negative
// adjoint. The Chambolle dual step size 1/8 is the classical bound for this
// discretization.
inline void tv_gradient(const std::vector<double>& u, int h, int w,
                        std::vector<double>& gx, std::vector<double>& gy) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = (x + 1 < w) ? u[i + 1] - u[i] : 0.0;
      gy[i] = (y + 1 < h) ? u[i + w] - u[i] : 0.0;
    }
}

inline double tv_divergence_at(const std::vector<double>& px, const std::vector<double>& py,
                               int h, int w, int y, int x) {
  const std::size_t i = static_cast<std::size_t>(y) * w + x;
  double d = 0.0;
  if (x == 0) d += px[i];
  else if (x == w - 1) d -= px[i - 1];
  else d += px[i] - px[i - 1];
  if (y == 0) d += py[i];
  else if (y == h - 1) d -= py[i - w];
  else d += py[i] - py[i - w];
  return d;
}

}  // namespace detail

/// Isotropic total variation of an image (forward differences, Neumann),
/// summed over channels. Used by the tests to check energy descent.
inline double total_variation(const Image& img) {
  double tv = 0.0;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const double dx = (x + 1 < img.width) ? img.at(c, y, x + 1) - img.at(c, y, x) : 0.0;
        const double dy = (y + 1 < img.height) ? img.at(c, y + 1, x) - img.at(c, y, x) : 0.0;
        tv += std::sqrt(dx * dx + dy * dy);
      }
  return tv;
}

/// Objective the TV prox minimizes: 0.5 ||x - z||^2 + weight * TV(x).
inline double tv_objective(const Image& x, const Image& z, double weight) {
  double fid = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = x.data[i] - z.data[i];
    fid += d * d;
  }
  return 0.5 * fid + weight * total_variation(x);
}

/// Approximate proximal operator of weighted isotropic TV via Chambolle's
/// dual projection: with u = z - w div p, iterate
///   p <- (p - (tau/w) grad u) / (1 + (tau/w) |grad u|)
/// and return the final u. The denoiser noise level beta maps to the TV
/// weight w = c_tv * beta^2 (the lambda/mu structure of the prior subproblem
/// makes the regularization strength quadratic in beta). Channels are
/// processed independently.
inline Image tv_denoise(const Image& z, double beta, int iters = 30, double c_tv = 0.5,
                        double dual_step = 0.125) {
  if (beta < 0) throw std::invalid_argument("tv_denoise: beta must be >= 0");
  if (iters < 1) throw std::invalid_argument("tv_denoise: iters must be >= 1");
  const double w_tv = c_tv * beta * beta;
  if (w_tv <= 0.0) return z;

  const int h = z.height, w = z.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Image out = z;
  std::vector<double> u(plane), gx(plane), gy(plane), px(plane), py(plane);

  for (int c = 0; c < z.channels; ++c) {
    auto zc = z.plane(c);
    std::fill(px.begin(), px.end(), 0.0);
    std::fill(py.begin(), py.end(), 0.0);
    for (int it = 0; it < iters; ++it) {
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          u[i] = zc[i] - w_tv * detail::tv_divergence_at(px, py, h, w, y, x);
        }
      detail::tv_gradient(u, h, w, gx, gy);
      const double step = dual_step / w_tv;
      for (std::size_t i = 0; i < plane; ++i) {
        const double nx = px[i] - step * gx[i];
        const double ny = py[i] - step * gy[i];
        const double mag = 1.0 + step * std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
        px[i] = nx / mag;
        py[i] = ny / mag;
      }
    }
    auto oc = out.plane(c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        oc[i] = zc[i] - w_tv * detail::tv_divergence_at(px, py, h, w, y, x);
      }
  }
  return out;
}

class TvDenoiser final : public DenoiserPrior {
 public:
  explicit TvDenoiser(int iters = 30, double c_tv = 0.5) : iters_(iters), c_tv_(c_tv) {}
  std::string name() const override { return "tv"; }
  Image denoise(const Image& z, double beta) const override {
    return tv_denoise(z, beta, iters_, c_tv_);
  }

 private:
  int iters_;
  double c_tv_;
};

/// Pass-through prior; turns the unfolded loop into pure data-consistency
/// iterations, useful as a baseline and in tests.
class IdentityDenoiser final : public DenoiserPrior {
 public:
  std::string name() const override { return "identity"; }
  Image denoise(const Image& z, double /*beta*/) const override { return z; }
};

}  // namespace unfoldsr
