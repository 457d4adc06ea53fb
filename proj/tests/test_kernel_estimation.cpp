#include <cmath>

#include "doctest.h"
#include "support/synthetic.hpp"
#include "unfoldsr/degradation.hpp"
#include "unfoldsr/kernel_estimation.hpp"
#include "unfoldsr/metrics.hpp"
#include "unfoldsr/resample.hpp"

using namespace unfoldsr;

namespace {

std::vector<std::pair<Image, Image>> classical_pairs(const Kernel& k, int s, int count,
                                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Image, Image>> pairs;
  for (int i = 0; i < count; ++i) {
    const Image hr = testsupport::random_image(48, 48, 1, rng);
    Rng noise(0);
    pairs.emplace_back(hr, degrade(hr, {s, k, 0.0}, noise));
  }
  return pairs;
}

std::vector<std::pair<Image, Image>> bicubic_pairs(int s, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Image, Image>> pairs;
  for (int i = 0; i < count; ++i) {
    const Image hr = testsupport::random_image(48, 48, 1, rng);
    pairs.emplace_back(hr, bicubic_downsample(hr, s));
  }
  return pairs;
}

}  // namespace

TEST_CASE("recovers a known gaussian kernel from consistent pairs") {
  const Kernel truth = gaussian_kernel(7, 1.1, 0.8, 0.4);
  const auto pairs = classical_pairs(truth, 2, 2, 81);
  const KernelEstimate est = estimate_equivalent_kernel(pairs, 2, 7);
  CHECK_FALSE(est.ill_conditioned);
  double rmse = 0.0;
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    const double d = est.kernel.data[i] - truth.data[i];
    rmse += d * d;
  }
  rmse = std::sqrt(rmse / static_cast<double>(truth.data.size()));
  CHECK(rmse < 1e-6);
  CHECK(est.residual_rmse < 1e-7);
}

TEST_CASE("bicubic x2 kernel: half-pixel shift toward the upper left, negative taps") {
  const auto pairs = bicubic_pairs(2, 2, 82);
  const KernelEstimate est = estimate_equivalent_kernel(pairs, 2, 15);
  const auto [cy, cx] = kernel_center_of_mass(est.kernel);
  const double mid = 7.0;
  CHECK(std::abs(cy - (mid - 0.5)) < 0.1);
  CHECK(std::abs(cx - (mid - 0.5)) < 0.1);
  CHECK(std::abs(est.raw_sum - 1.0) < 1e-3);

  double most_negative = 0.0;
  for (double v : est.kernel.data) most_negative = std::min(most_negative, v);
  CHECK(most_negative < -1e-4);
}

TEST_CASE("estimated kernel reproduces bicubic LR on held-out images") {
  const auto pairs = bicubic_pairs(2, 2, 83);
  const KernelEstimate est = estimate_equivalent_kernel(pairs, 2, 15);

  Rng rng(991);
  const Image held_out = testsupport::synthetic_scene(48, 48, 1, 1234);
  Rng noise(0);
  const Image via_kernel = degrade(held_out, {2, est.kernel, 0.0}, noise);
  const Image reference = bicubic_downsample(held_out, 2);
  CHECK(psnr(reference, via_kernel, 0) >= 45.0);
  (void)rng;
}

TEST_CASE("residual is non-increasing in kernel size") {
  const auto pairs = bicubic_pairs(2, 1, 84);
  double prev = 1e9;
  for (int ksize : {5, 9, 13}) {
    const KernelEstimate est = estimate_equivalent_kernel(pairs, 2, ksize);
    CHECK(est.residual_rmse <= prev + 1e-9);
    prev = est.residual_rmse;
  }
}

TEST_CASE("near-constant HR content is flagged as ill-conditioned") {
  Image flat(24, 24, 1, 0.5);
  const std::vector<std::pair<Image, Image>> pairs = {{flat, standard_downsample(flat, 2)}};
  const KernelEstimate est = estimate_equivalent_kernel(pairs, 2, 5);
  CHECK(est.ill_conditioned);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(estimate_equivalent_kernel({}, 2, 5), std::invalid_argument);
  const auto pairs = bicubic_pairs(2, 1, 85);
  CHECK_THROWS_AS(estimate_equivalent_kernel(pairs, 2, 4), std::invalid_argument);
  CHECK_THROWS_AS(estimate_equivalent_kernel(pairs, 3, 5), std::invalid_argument);
}
