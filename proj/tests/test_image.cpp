#include <cmath>

#include "doctest.h"
#include "support/synthetic.hpp"
#include "unfoldsr/image.hpp"

using namespace unfoldsr;

namespace {

Image from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.begin()->size());
  Image img(h, w, 1);
  int y = 0;
  for (const auto& row : rows) {
    int x = 0;
    for (double v : row) img.at(0, y, x++) = v;
    ++y;
  }
  return img;
}

bool equal_images(const Image& a, const Image& b, double tol = 0.0) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (std::abs(a.data[i] - b.data[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("nearest_upsample examples") {
  const Image base = from_rows({{1, 2}, {3, 4}});
  CHECK(equal_images(nearest_upsample(base, 1), base));

  const Image one = from_rows({{1}});
  CHECK(equal_images(nearest_upsample(one, 2), from_rows({{1, 1}, {1, 1}})));

  CHECK(equal_images(nearest_upsample(base, 2),
                     from_rows({{1, 1, 2, 2}, {1, 1, 2, 2}, {3, 3, 4, 4}, {3, 3, 4, 4}})));
}

TEST_CASE("standard_downsample examples") {
  CHECK(equal_images(standard_downsample(from_rows({{1, 2}, {3, 4}}), 2), from_rows({{1}})));

  const Image any = from_rows({{5, 6}, {7, 8}});
  CHECK(equal_images(standard_downsample(any, 1), any));

  Image ramp(4, 4, 1);
  for (int i = 0; i < 16; ++i) ramp.data[i] = i;
  CHECK(equal_images(standard_downsample(ramp, 2), from_rows({{0, 2}, {8, 10}})));

  CHECK_THROWS_AS(standard_downsample(from_rows({{1, 2, 3}}), 2), std::invalid_argument);
}

TEST_CASE("zero_upsample examples") {
  CHECK(equal_images(zero_upsample(from_rows({{1}}), 2), from_rows({{1, 0}, {0, 0}})));
  CHECK(equal_images(zero_upsample(from_rows({{1, 2}}), 1), from_rows({{1, 2}})));
  CHECK(equal_images(zero_upsample(from_rows({{1, 2}, {3, 4}}), 2),
                     from_rows({{1, 0, 2, 0}, {0, 0, 0, 0}, {3, 0, 4, 0}, {0, 0, 0, 0}})));
}

TEST_CASE("downsample inverts both upsamplers exactly") {
  Rng rng(11);
  for (int s : {1, 2, 3, 4}) {
    const Image x = testsupport::random_image(6, 9, 3, rng);
    CHECK(equal_images(standard_downsample(nearest_upsample(x, s), s), x));
    CHECK(equal_images(standard_downsample(zero_upsample(x, s), s), x));
  }
}

TEST_CASE("awgn with zero sigma is bit-identical") {
  Rng rng(5);
  const Image x = testsupport::random_image(8, 8, 1, rng);
  Rng noise_rng(77);
  const Image y = add_awgn(x, 0.0, noise_rng);
  CHECK(equal_images(x, y));
}

TEST_CASE("awgn sample std matches sigma") {
  const Image zeros(256, 256, 1, 0.0);
  Rng rng(123);
  const Image noisy = add_awgn(zeros, 25.5, rng);
  double sq = 0.0;
  for (double v : noisy.data) sq += v * v;
  const double std = std::sqrt(sq / static_cast<double>(noisy.data.size()));
  CHECK(std > 0.095);
  CHECK(std < 0.105);
}

TEST_CASE("awgn is deterministic given the seed") {
  Rng r1(9), r2(9);
  const Image x = testsupport::random_image(16, 16, 3, r1);
  Rng n1(4), n2(4);
  CHECK(equal_images(add_awgn(x, 7.65, n1), add_awgn(x, 7.65, n2)));
}

TEST_CASE("replicate_pad and crop round-trip") {
  Rng rng(3);
  const Image x = testsupport::random_image(5, 7, 2, rng);
  const Image padded = replicate_pad(x, 2, 1, 3, 4);
  CHECK(padded.height == 8);
  CHECK(padded.width == 14);
  CHECK(equal_images(crop(padded, 2, 3, 5, 7), x));
  // corner values replicate
  CHECK(padded.at(0, 0, 0) == x.at(0, 0, 0));
  CHECK(padded.at(1, 7, 13) == x.at(1, 4, 6));
}

TEST_CASE("center_crop_to_multiple") {
  Rng rng(8);
  const Image x = testsupport::random_image(50, 61, 1, rng);
  const Image c = center_crop_to_multiple(x, 12);
  CHECK(c.height == 48);
  CHECK(c.width == 60);
  CHECK(c.at(0, 0, 0) == x.at(0, 1, 0));
}
