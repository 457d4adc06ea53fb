#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/synthetic.hpp"
#include "unfoldsr/resample.hpp"

using namespace unfoldsr;

namespace {

// Independent dense-weight-matrix bicubic downsampler: materialize the full
// (out x in) separable weight matrix per axis from first principles and
// apply it, with circular indexing. The implementation under test never sees
// these matrices.
Image bicubic_down_dense(const Image& img, int s) {
  const auto axis_matrix = [s](int out_len, int in_len) {
    std::vector<double> m(static_cast<std::size_t>(out_len) * in_len, 0.0);
    for (int i = 0; i < out_len; ++i) {
      const double center = s * i + (s - 1) / 2.0;
      for (int j = -3 * s; j <= in_len + 3 * s; ++j) {
        const double w = keys_cubic((j - center) / s) / s;
        if (w != 0.0) m[static_cast<std::size_t>(i) * in_len + ((j % in_len + in_len) % in_len)] += w;
      }
    }
    return m;
  };
  const int oh = img.height / s, ow = img.width / s;
  const std::vector<double> my = axis_matrix(oh, img.height);
  const std::vector<double> mx = axis_matrix(ow, img.width);
  Image out(oh, ow, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int y = 0; y < img.height; ++y) {
          const double wy = my[static_cast<std::size_t>(oy) * img.height + y];
          if (wy == 0.0) continue;
          for (int x = 0; x < img.width; ++x) {
            const double wx = mx[static_cast<std::size_t>(ox) * img.width + x];
            if (wx != 0.0) acc += wy * wx * img.at(c, y, x);
          }
        }
        out.at(c, oy, ox) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("bicubic downsample preserves constants exactly") {
  const Image x(24, 24, 1, 0.37);
  for (int s : {2, 3, 4}) {
    const Image y = bicubic_downsample(x, s);
    for (double v : y.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
  }
}

TEST_CASE("bicubic downsample reproduces linear ramps in the interior") {
  const int n = 24;
  Image x(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int xx = 0; xx < n; ++xx) x.at(0, y, xx) = 0.01 * xx + 0.02 * y;
  const int s = 2;
  const Image y = bicubic_downsample(x, s);
  const double off = (s - 1) / 2.0;
  for (int yy = 2; yy < y.height - 2; ++yy)
    for (int xx = 2; xx < y.width - 2; ++xx)
      CHECK(y.at(0, yy, xx) ==
            doctest::Approx(0.01 * (s * xx + off) + 0.02 * (s * yy + off)).epsilon(1e-10));
}

TEST_CASE("bicubic downsample matches the dense weight-matrix oracle") {
  Rng rng(70);
  const Image x = testsupport::random_image(16, 16, 1, rng);
  for (int s : {2, 4}) {
    const Image fast = bicubic_downsample(x, s);
    const Image dense = bicubic_down_dense(x, s);
    for (std::size_t i = 0; i < fast.data.size(); ++i)
      CHECK(std::abs(fast.data[i] - dense.data[i]) < 1e-12);
  }
  const Image x3 = testsupport::random_image(12, 18, 1, rng);
  const Image fast = bicubic_downsample(x3, 3);
  const Image dense = bicubic_down_dense(x3, 3);
  for (std::size_t i = 0; i < fast.data.size(); ++i)
    CHECK(std::abs(fast.data[i] - dense.data[i]) < 1e-12);
}

TEST_CASE("bicubic upsample interpolates: decimation inverts it exactly") {
  Rng rng(71);
  const Image x = testsupport::random_image(7, 9, 3, rng);
  for (int s : {2, 3, 4}) {
    const Image up = bicubic_upsample(x, s);
    CHECK(up.height == x.height * s);
    const Image back = standard_downsample(up, s);
    for (std::size_t i = 0; i < x.data.size(); ++i)
      CHECK(std::abs(back.data[i] - x.data[i]) < 1e-14);
  }
}

TEST_CASE("bicubic upsample preserves constants") {
  const Image x(5, 5, 1, 0.25);
  const Image up = bicubic_upsample(x, 3);
  for (double v : up.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("bicubic downsample validates scale and divisibility") {
  const Image x(10, 10, 1, 0.0);
  CHECK_THROWS_AS(bicubic_downsample(x, 3), std::invalid_argument);
  CHECK_THROWS_AS(bicubic_downsample(x, 1), std::invalid_argument);
  CHECK_THROWS_AS(bicubic_downsample(x, 5), std::invalid_argument);
}
