#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/detail/parallel.hpp"
#include "unfoldsr/image.hpp"
#include "unfoldsr/prior.hpp"
#include "unfoldsr/weights.hpp"

namespace unfoldsr {

/// Architecture of the residual U-Net denoiser. Four scales with channel
/// widths 64/128/256/512; each scale transition runs a group of two residual
/// blocks, downscaling uses a 2x2 stride-2 convolution and upscaling a 2x2
/// transposed convolution, with an identity skip between matching scales.
/// The network input is the image concatenated with a constant noise-level
/// plane; head and tail are plain 3x3 convolutions. No activation follows
/// the strided/transposed convolutions or the first and last convolutions;
/// residual blocks are conv3x3 -> ReLU -> conv3x3 plus identity.
struct ResUNetConfig {
  int image_channels = 3;                      // network input is this + 1 noise plane
  std::array<int, 4> widths = {64, 128, 256, 512};
  int blocks_per_group = 2;
  bool bias = true;
};

namespace detail {

inline void append_conv(std::vector<TensorSpec>& out, const std::string& name,
                        int out_c, int in_c, int kh, int kw, bool bias) {
  out.push_back({name + ".weight", {out_c, in_c, kh, kw}});
  if (bias) out.push_back({name + ".bias", {out_c}});
}

// Transposed convolutions store weights as [in_c, out_c, kh, kw].
inline void append_tconv(std::vector<TensorSpec>& out, const std::string& name,
                         int in_c, int out_c, bool bias) {
  out.push_back({name + ".weight", {in_c, out_c, 2, 2}});
  if (bias) out.push_back({name + ".bias", {out_c}});
}

inline void append_res_group(std::vector<TensorSpec>& out, const std::string& prefix,
                             int channels, int blocks, bool bias) {
  for (int b = 0; b < blocks; ++b) {
    append_conv(out, prefix + ".block" + std::to_string(b) + ".conv0", channels, channels, 3, 3, bias);
    append_conv(out, prefix + ".block" + std::to_string(b) + ".conv1", channels, channels, 3, 3, bias);
  }
}

}  // namespace detail

/// Expected tensor names and shapes for a configuration. This is the
/// authoritative manifest; the JSON copy in the repository mirrors it.
inline std::vector<TensorSpec> resunet_manifest(const ResUNetConfig& cfg = {}) {
  const auto& nc = cfg.widths;
  const int in_c = cfg.image_channels + 1;
  std::vector<TensorSpec> m;
  detail::append_conv(m, "head", nc[0], in_c, 3, 3, cfg.bias);
  for (int s = 0; s < 3; ++s) {
    const std::string down = "down" + std::to_string(s + 1);
    detail::append_res_group(m, down, nc[s], cfg.blocks_per_group, cfg.bias);
    detail::append_conv(m, down + ".down", nc[s + 1], nc[s], 2, 2, cfg.bias);
  }
  detail::append_res_group(m, "body", nc[3], cfg.blocks_per_group, cfg.bias);
  for (int s = 2; s >= 0; --s) {
    const std::string up = "up" + std::to_string(s + 1);
    detail::append_tconv(m, up + ".up", nc[s + 1], nc[s], cfg.bias);
    detail::append_res_group(m, up, nc[s], cfg.blocks_per_group, cfg.bias);
  }
  detail::append_conv(m, "tail", cfg.image_channels, nc[0], 3, 3, cfg.bias);
  return m;
}

inline std::size_t resunet_parameter_count(const ResUNetConfig& cfg = {}) {
  std::size_t n = 0;
  for (const auto& spec : resunet_manifest(cfg)) n += spec.numel();
  return n;
}

namespace detail {

// Planar float feature map, single precision as allowed for CNN inference.
struct FeatureMap {
  int channels = 0, height = 0, width = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w),
      data(static_cast<std::size_t>(c) * h * w, 0.0f) {}

  float* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
  const float* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * height * width; }
};

struct ResUNetWeights {
  const WeightStore* store;
  bool bias;

  const Tensor& w(const std::string& name) const { return store->get(name + ".weight"); }
  const float* b(const std::string& name, int out_c) const {
    if (!bias) return nullptr;
    const Tensor& t = store->get(name + ".bias");
    (void)out_c;
    return t.values.data();
  }
};

// 3x3 convolution, zero padding, stride 1.
inline FeatureMap conv3x3(const FeatureMap& in, const Tensor& weight, const float* bias) {
  const int out_c = weight.shape[0], in_c = weight.shape[1];
  const int h = in.height, w = in.width;
  FeatureMap out(out_c, h, w);
  parallel_for(out_c, [&](int oc) {
    float* op = out.plane(oc);
    for (int ic = 0; ic < in_c; ++ic) {
      const float* ip = in.plane(ic);
      const float* k = weight.values.data() + (static_cast<std::size_t>(oc) * in_c + ic) * 9;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          float acc = 0.0f;
          for (int dy = -1; dy <= 1; ++dy) {
            const int sy = y + dy;
            if (sy < 0 || sy >= h) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int sx = x + dx;
              if (sx < 0 || sx >= w) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * ip[static_cast<std::size_t>(sy) * w + sx];
            }
          }
          op[static_cast<std::size_t>(y) * w + x] += acc;
        }
    }
    if (bias) {
      const float bv = bias[oc];
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) op[i] += bv;
    }
  });
  return out;
}

// 2x2 convolution with stride 2 (halves the spatial size; dims must be even).
inline FeatureMap sconv2x2(const FeatureMap& in, const Tensor& weight, const float* bias) {
  const int out_c = weight.shape[0], in_c = weight.shape[1];
  const int oh = in.height / 2, ow = in.width / 2;
  FeatureMap out(out_c, oh, ow);
  parallel_for(out_c, [&](int oc) {
    float* op = out.plane(oc);
    for (int ic = 0; ic < in_c; ++ic) {
      const float* ip = in.plane(ic);
      const float* k = weight.values.data() + (static_cast<std::size_t>(oc) * in_c + ic) * 4;
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          const float* p = ip + static_cast<std::size_t>(2 * y) * in.width + 2 * x;
          op[static_cast<std::size_t>(y) * ow + x] +=
              k[0] * p[0] + k[1] * p[1] + k[2] * p[in.width] + k[3] * p[in.width + 1];
        }
    }
    if (bias) {
      const float bv = bias[oc];
      for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) op[i] += bv;
    }
  });
  return out;
}

// 2x2 transposed convolution with stride 2 (doubles the spatial size).
// Weight layout [in_c, out_c, 2, 2]: out(2y+dy, 2x+dx) += w[ic][oc][dy][dx] * in(y,x).
inline FeatureMap tconv2x2(const FeatureMap& in, const Tensor& weight, const float* bias) {
  const int in_c = weight.shape[0], out_c = weight.shape[1];
  const int oh = in.height * 2, ow = in.width * 2;
  FeatureMap out(out_c, oh, ow);
  parallel_for(out_c, [&](int oc) {
    float* op = out.plane(oc);
    for (int ic = 0; ic < in_c; ++ic) {
      const float* ip = in.plane(ic);
      const float* k = weight.values.data() + (static_cast<std::size_t>(ic) * out_c + oc) * 4;
      for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
          const float v = ip[static_cast<std::size_t>(y) * in.width + x];
          float* p = op + static_cast<std::size_t>(2 * y) * ow + 2 * x;
          p[0] += k[0] * v;
          p[1] += k[1] * v;
          p[ow] += k[2] * v;
          p[ow + 1] += k[3] * v;
        }
    }
    if (bias) {
      const float bv = bias[oc];
      for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) op[i] += bv;
    }
  });
  return out;
}

inline void relu_inplace(FeatureMap& f) {
  for (float& v : f.data) v = v > 0.0f ? v : 0.0f;
}

inline void add_inplace(FeatureMap& a, const FeatureMap& b) {
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline FeatureMap res_group(FeatureMap x, const ResUNetWeights& wt, const std::string& prefix,
                            int channels, int blocks) {
  for (int bidx = 0; bidx < blocks; ++bidx) {
    const std::string base = prefix + ".block" + std::to_string(bidx);
    FeatureMap t = conv3x3(x, wt.w(base + ".conv0"), wt.b(base + ".conv0", channels));
    relu_inplace(t);
    t = conv3x3(t, wt.w(base + ".conv1"), wt.b(base + ".conv1", channels));
    add_inplace(t, x);
    x = std::move(t);
  }
  return x;
}

}  // namespace detail

/// Forward pass of the ResUNet denoiser with externally supplied weights.
/// The noise level beta enters as a constant extra input plane. Spatial size
/// must be divisible by 8 for the three downscalings; other sizes are
/// replicate-padded on the bottom/right and cropped back afterwards.
inline Image resunet_forward(const Image& z, double beta, const WeightStore& store,
                             const ResUNetConfig& cfg_in = {}) {
  ResUNetConfig cfg = cfg_in;
  cfg.image_channels = z.channels;
  validate_weights(store, resunet_manifest(cfg));

  const int pad_h = (8 - z.height % 8) % 8;
  const int pad_w = (8 - z.width % 8) % 8;
  const Image padded = (pad_h || pad_w) ? replicate_pad(z, 0, pad_h, 0, pad_w) : z;
  const int h = padded.height, w = padded.width;

  detail::FeatureMap input(z.channels + 1, h, w);
  for (int c = 0; c < z.channels; ++c) {
    float* p = input.plane(c);
    auto src = padded.plane(c);
    for (std::size_t i = 0; i < src.size(); ++i) p[i] = static_cast<float>(src[i]);
  }
  {
    float* p = input.plane(z.channels);
    std::fill(p, p + static_cast<std::size_t>(h) * w, static_cast<float>(beta));
  }

  const detail::ResUNetWeights wt{&store, cfg.bias};
  const auto& nc = cfg.widths;
  const int nb = cfg.blocks_per_group;

  detail::FeatureMap x1 = detail::conv3x3(input, wt.w("head"), wt.b("head", nc[0]));
  detail::FeatureMap x2 = detail::res_group(x1, wt, "down1", nc[0], nb);
  x2 = detail::sconv2x2(x2, wt.w("down1.down"), wt.b("down1.down", nc[1]));
  detail::FeatureMap x3 = detail::res_group(x2, wt, "down2", nc[1], nb);
  x3 = detail::sconv2x2(x3, wt.w("down2.down"), wt.b("down2.down", nc[2]));
  detail::FeatureMap x4 = detail::res_group(x3, wt, "down3", nc[2], nb);
  x4 = detail::sconv2x2(x4, wt.w("down3.down"), wt.b("down3.down", nc[3]));

  detail::FeatureMap x = detail::res_group(x4, wt, "body", nc[3], nb);

  detail::add_inplace(x, x4);
  x = detail::tconv2x2(x, wt.w("up3.up"), wt.b("up3.up", nc[2]));
  x = detail::res_group(std::move(x), wt, "up3", nc[2], nb);
  detail::add_inplace(x, x3);
  x = detail::tconv2x2(x, wt.w("up2.up"), wt.b("up2.up", nc[1]));
  x = detail::res_group(std::move(x), wt, "up2", nc[1], nb);
  detail::add_inplace(x, x2);
  x = detail::tconv2x2(x, wt.w("up1.up"), wt.b("up1.up", nc[0]));
  x = detail::res_group(std::move(x), wt, "up1", nc[0], nb);
  detail::add_inplace(x, x1);
  x = detail::conv3x3(x, wt.w("tail"), wt.b("tail", z.channels));

  Image out(z.height, z.width, z.channels);
  for (int c = 0; c < z.channels; ++c) {
    const float* p = x.plane(c);
    for (int y = 0; y < z.height; ++y)
      for (int xx = 0; xx < z.width; ++xx)
        out.at(c, y, xx) = static_cast<double>(p[static_cast<std::size_t>(y) * w + xx]);
  }
  return out;
}

/// DenoiserPrior adapter around resunet_forward.
class CnnDenoiser final : public DenoiserPrior {
 public:
  explicit CnnDenoiser(WeightStore store, ResUNetConfig cfg = {})
      : store_(std::move(store)), cfg_(cfg) {}
  std::string name() const override { return "cnn"; }
  Image denoise(const Image& z, double beta) const override {
    return resunet_forward(z, beta, store_, cfg_);
  }

 private:
  WeightStore store_;
  ResUNetConfig cfg_;
};

}  // namespace unfoldsr
