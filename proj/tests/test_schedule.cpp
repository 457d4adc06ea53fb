#include <cmath>

#include "doctest.h"
#include "unfoldsr/schedule.hpp"

using namespace unfoldsr;

TEST_CASE("K = 1 degenerates to the end of the beta range") {
  const HyperSchedule s = analytic_schedule(2.55, 2, 1);
  CHECK(s.iterations() == 1);
  CHECK(s.betas[0] == doctest::Approx(2.55 / 255.0).epsilon(1e-12));
}

TEST_CASE("beta descends strictly, alpha ascends strictly") {
  for (double sigma : {0.0, 2.55, 7.65, 25.0}) {
    const HyperSchedule s = analytic_schedule(sigma, 3, 8);
    for (int k = 1; k < 8; ++k) {
      CHECK(s.betas[k] < s.betas[k - 1]);
      CHECK(s.alphas[k] > s.alphas[k - 1]);
    }
    for (int k = 0; k < 8; ++k) {
      CHECK(s.alphas[k] >= 1e-6);
      CHECK(s.betas[k] >= 1e-6);
    }
  }
}

TEST_CASE("alpha * beta^2 = lambda * sigma^2 to machine precision") {
  for (double sigma : {0.0, 2.55, 7.65, 25.0}) {
    const HyperSchedule s = analytic_schedule(sigma, 2, 8);
    const double target = s.lambda_ * s.sigma * s.sigma;
    for (int k = 0; k < s.iterations(); ++k) {
      const double prod = s.alphas[k] * s.betas[k] * s.betas[k];
      CHECK(std::abs(prod - target) <= 1e-12 * target);
    }
  }
}

TEST_CASE("alpha never decreases when sigma grows") {
  const HyperSchedule lo = analytic_schedule(2.55, 2, 8);
  const HyperSchedule hi = analytic_schedule(7.65, 2, 8);
  for (int k = 0; k < 8; ++k) CHECK(hi.alphas[k] >= lo.alphas[k]);
}

TEST_CASE("invalid ranges are rejected") {
  CHECK_THROWS_AS(analytic_schedule(2.55, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(analytic_schedule(-1.0, 2, 8), std::invalid_argument);
  CHECK_THROWS_AS(analytic_schedule(25.0, 2, 8, 20.0), std::invalid_argument);  // start below sigma
  CHECK_THROWS_AS(analytic_schedule(0.0, 2, 8, 0.05), std::invalid_argument);   // start below floor
  CHECK_THROWS_AS(analytic_schedule(0.0, 2, 8, 49.0, 0.0), std::invalid_argument);
}

TEST_CASE("mlp schedule with zero weights gives softplus(0) + 1e-6 everywhere") {
  WeightStore store;
  for (const auto& spec : mlp_manifest(8)) {
    Tensor t;
    t.shape = spec.shape;
    t.values.assign(spec.numel(), 0.0f);
    store.add(spec.name, std::move(t));
  }
  const HyperSchedule s = mlp_schedule(2.55, 2, store);
  const double expected = std::log(2.0) + 1e-6;
  CHECK(s.iterations() == 8);
  for (int k = 0; k < 8; ++k) {
    CHECK(s.alphas[k] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s.betas[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mlp outputs are positive and deterministic for random weights") {
  Rng rng(120);
  const WeightStore store = random_weights(mlp_manifest(8), rng);
  const HyperSchedule a = mlp_schedule(7.65, 4, store);
  const HyperSchedule b = mlp_schedule(7.65, 4, store);
  for (int k = 0; k < 8; ++k) {
    CHECK(a.alphas[k] >= 1e-6);
    CHECK(a.betas[k] >= 1e-6);
    CHECK(a.alphas[k] == b.alphas[k]);
    CHECK(a.betas[k] == b.betas[k]);
  }
}

TEST_CASE("mlp weight validation") {
  Rng rng(121);
  WeightStore store = random_weights(mlp_manifest(8), rng);
  WeightStore broken;
  for (const auto& [name, t] : store.tensors())
    if (name != "fc2.bias") {
      Tensor copy = t;
      broken.add(name, std::move(copy));
    }
  CHECK_THROWS_WITH_AS(mlp_schedule(2.55, 2, broken), doctest::Contains("fc2.bias"),
                       std::runtime_error);
}

TEST_CASE("csv dump has one line per iteration") {
  const HyperSchedule s = analytic_schedule(2.55, 2, 4);
  const std::string csv = schedule_to_csv(s);
  CHECK(csv.rfind("k,alpha,beta\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
