#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "unfoldsr/degradation.hpp"

using namespace unfoldsr;

TEST_CASE("delta kernel at scale 1 with no noise is the identity") {
  Rng rng(60);
  const Image x = testsupport::random_image(12, 12, 3, rng);
  Kernel one(1, 1);
  one.at(0, 0) = 1.0;
  Rng noise(0);
  const Image y = degrade(x, {1, one, 0.0}, noise);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(std::abs(y.data[i] - x.data[i]) < 1e-13);
}

TEST_CASE("normalized kernel preserves constant images") {
  const Image x(12, 12, 1, 0.42);
  const Kernel box(3, 3, 1.0 / 9.0);
  Rng noise(0);
  const Image y = degrade(x, {1, box, 0.0}, noise);
  for (double v : y.data) CHECK(v == doctest::Approx(0.42).epsilon(1e-13));
}

TEST_CASE("degrade matches the dense S*H oracle") {
  Rng rng(61);
  for (int s : {1, 2, 3}) {
    const int n = 12 * s;   // keep s dividing the dims
    const Image x = testsupport::random_image(n, n, 1, rng);
    const Kernel k = testsupport::random_kernel(5, rng);
    Rng noise(0);
    const Image y = degrade(x, {s, k, 0.0}, noise);

    const auto op = testsupport::dense_degradation_operator(n, n, k, s);
    const std::vector<double> ref = op.apply({x.data.begin(), x.data.end()});
    double max_err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      max_err = std::max(max_err, std::abs(ref[i] - y.data[i]));
    CHECK(max_err < 1e-12);
  }
}

TEST_CASE("degrade with a delta kernel is downsample-then-noise") {
  Rng rng(62);
  const Image x = testsupport::random_image(16, 16, 1, rng);
  const Kernel d = delta_kernel(3);
  Rng n1(5), n2(5);
  const Image via_degrade = degrade(x, {2, d, 7.65}, n1);
  const Image direct = add_awgn(standard_downsample(x, 2), 7.65, n2);
  for (std::size_t i = 0; i < direct.data.size(); ++i)
    CHECK(std::abs(via_degrade.data[i] - direct.data[i]) < 1e-12);
}

TEST_CASE("degrade is linear in the image when noise-free") {
  Rng rng(63);
  const Image a = testsupport::random_image(12, 12, 1, rng);
  const Image b = testsupport::random_image(12, 12, 1, rng);
  Image combo(12, 12, 1);
  for (std::size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = 2.0 * a.data[i] - 0.7 * b.data[i];
  const Kernel k = testsupport::random_kernel(3, rng);
  Rng n0(0);
  const Image ya = degrade(a, {2, k, 0.0}, n0);
  const Image yb = degrade(b, {2, k, 0.0}, n0);
  const Image yc = degrade(combo, {2, k, 0.0}, n0);
  for (std::size_t i = 0; i < yc.data.size(); ++i)
    CHECK(yc.data[i] == doctest::Approx(2.0 * ya.data[i] - 0.7 * yb.data[i]).epsilon(1e-10));
}

TEST_CASE("degrade validates its inputs") {
  Rng rng(64);
  const Image x = testsupport::random_image(9, 9, 1, rng);
  Rng noise(0);
  CHECK_THROWS_AS(degrade(x, {2, delta_kernel(3), 0.0}, noise), std::invalid_argument);
  CHECK_THROWS_AS(degrade(x, {0, delta_kernel(3), 0.0}, noise), std::invalid_argument);
  CHECK_THROWS_AS(degrade(x, {1, delta_kernel(3), 26.0}, noise), std::invalid_argument);
  CHECK_THROWS_AS(degrade(x, {1, delta_kernel(3), -1.0}, noise), std::invalid_argument);
}

TEST_CASE("adjoint identity of the dense operator") {
  Rng rng(65);
  const int n = 12;
  const Kernel k = testsupport::random_kernel(5, rng);
  for (int s : {1, 2, 3}) {
    const auto op = testsupport::dense_degradation_operator(n, n, k, s);
    std::vector<double> x(static_cast<std::size_t>(op.n)), u(static_cast<std::size_t>(op.m));
    for (double& v : x) v = rng.next_unit() - 0.5;
    for (double& v : u) v = rng.next_unit() - 0.5;
    const auto ax = op.apply(x);
    const auto atu = op.apply_adjoint(u);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < op.m; ++i) lhs += ax[i] * u[i];
    for (int i = 0; i < op.n; ++i) rhs += x[i] * atu[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
