#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support/synthetic.hpp"
#include "unfoldsr/resunet.hpp"

using namespace unfoldsr;

TEST_CASE("manifest parameter count matches the closed-form expression") {
  // Closed form per layer group, spelled out independently of the manifest
  // enumeration: conv c_in->c_out k x k costs c_out*c_in*k^2 (+ c_out bias).
  const auto conv = [](int co, int ci, int k, bool bias) {
    return static_cast<std::size_t>(co) * ci * k * k + (bias ? co : 0);
  };
  for (const bool bias : {true, false}) {
    for (const int image_channels : {1, 3}) {
      const int in = image_channels + 1;
      const int nc[4] = {64, 128, 256, 512};
      std::size_t expected = conv(nc[0], in, 3, bias);                       // head
      for (int s = 0; s < 3; ++s)
        expected += 2 * (2 * conv(nc[s], nc[s], 3, bias))                    // res groups down
                    + conv(nc[s + 1], nc[s], 2, bias);                       // strided conv
      expected += 2 * (2 * conv(nc[3], nc[3], 3, bias));                     // body
      for (int s = 2; s >= 0; --s)
        expected += conv(nc[s], nc[s + 1], 2, bias)                          // transposed conv
                    + 2 * (2 * conv(nc[s], nc[s], 3, bias));                 // res groups up
      expected += conv(image_channels, nc[0], 3, bias);                      // tail

      ResUNetConfig cfg;
      cfg.image_channels = image_channels;
      cfg.bias = bias;
      CHECK(resunet_parameter_count(cfg) == expected);
    }
  }
}

TEST_CASE("forward pass preserves dimensions") {
  ResUNetConfig cfg;
  cfg.image_channels = 1;
  Rng rng(110);
  const WeightStore store = random_weights(resunet_manifest(cfg), rng);
  for (auto [h, w] : {std::pair{16, 16}, {24, 40}, {18, 26}}) {   // last one needs pad/crop
    const Image z = testsupport::random_image(h, w, 1, rng);
    const Image out = resunet_forward(z, 0.05, store, cfg);
    CHECK(out.height == h);
    CHECK(out.width == w);
    CHECK(out.channels == 1);
    CHECK(all_finite(out));
  }
}

TEST_CASE("all-zero weights give the all-zero output") {
  ResUNetConfig cfg;
  cfg.image_channels = 1;
  WeightStore store;
  for (const auto& spec : resunet_manifest(cfg)) {
    Tensor t;
    t.shape = spec.shape;
    t.values.assign(spec.numel(), 0.0f);
    store.add(spec.name, std::move(t));
  }
  Rng rng(111);
  const Image z = testsupport::random_image(16, 16, 1, rng);
  const Image out = resunet_forward(z, 0.3, store, cfg);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("forward pass is deterministic") {
  ResUNetConfig cfg;
  cfg.image_channels = 1;
  Rng rng(112);
  const WeightStore store = random_weights(resunet_manifest(cfg), rng);
  const Image z = testsupport::random_image(16, 24, 1, rng);
  const Image a = resunet_forward(z, 0.1, store, cfg);
  const Image b = resunet_forward(z, 0.1, store, cfg);
  CHECK(a.data == b.data);
}

TEST_CASE("missing and mis-shaped tensors are rejected by name") {
  ResUNetConfig cfg;
  cfg.image_channels = 1;
  Rng rng(113);
  WeightStore store = random_weights(resunet_manifest(cfg), rng);
  const Image z = testsupport::random_image(8, 8, 1, rng);

  WeightStore broken;
  for (const auto& [name, t] : store.tensors())
    if (name != "body.block1.conv1.weight") {
      Tensor copy = t;
      broken.add(name, std::move(copy));
    }
  CHECK_THROWS_WITH_AS(resunet_forward(z, 0.1, broken, cfg),
                       doctest::Contains("body.block1.conv1.weight"), std::runtime_error);
}

TEST_CASE("noise plane enters the computation") {
  ResUNetConfig cfg;
  cfg.image_channels = 1;
  Rng rng(114);
  const WeightStore store = random_weights(resunet_manifest(cfg), rng);
  const Image z = testsupport::random_image(16, 16, 1, rng);
  const Image a = resunet_forward(z, 0.0, store, cfg);
  const Image b = resunet_forward(z, 0.5, store, cfg);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) diff = std::max(diff, std::abs(a.data[i] - b.data[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("shipped JSON manifest mirrors the code") {
  std::ifstream in(std::string(TEST_SOURCE_DIR) + "/../manifests/resunet_color.json");
  REQUIRE(in.good());
  nlohmann::json doc;
  in >> doc;
  CHECK(doc.at("architecture") == "resunet");
  CHECK(doc.at("image_channels") == 3);
  CHECK(doc.at("bias") == true);

  ResUNetConfig cfg;
  cfg.image_channels = 3;
  const auto manifest = resunet_manifest(cfg);
  REQUIRE(doc.at("tensors").size() == manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    CHECK(doc.at("tensors")[i].at("name") == manifest[i].name);
    CHECK(doc.at("tensors")[i].at("shape").get<std::vector<int>>() == manifest[i].shape);
  }
}
