#pragma once

#include <cstdint>
#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/kernel.hpp"   // byte helpers
#include "unfoldsr/rng.hpp"

namespace unfoldsr {

struct Tensor {
  std::vector<int> shape;
  std::vector<float> values;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

struct TensorSpec {
  std::string name;
  std::vector<int> shape;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

/// Immutable-after-load container of named float32 tensors.
class WeightStore {
 public:
  void add(const std::string& name, Tensor t) {
    if (t.numel() != t.values.size()) throw std::invalid_argument("Tensor payload does not match shape: " + name);
    if (!tensors_.emplace(name, std::move(t)).second)
      throw std::invalid_argument("duplicate tensor: " + name);
  }

  bool has(const std::string& name) const { return tensors_.count(name) != 0; }

  const Tensor& get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::runtime_error("missing tensor: " + name);
    return it->second;
  }

  std::size_t tensor_count() const { return tensors_.size(); }

  std::size_t total_parameters() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tensors_) n += t.numel();
    return n;
  }

  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

/// Check a store against a manifest: every listed tensor must be present with
/// exactly the listed shape, and nothing else may be present. Errors name the
/// offending tensor.
inline void validate_weights(const WeightStore& store, const std::vector<TensorSpec>& manifest) {
  for (const auto& spec : manifest) {
    if (!store.has(spec.name))
      throw std::runtime_error("weight validation: missing tensor '" + spec.name + "'");
    const Tensor& t = store.get(spec.name);
    if (t.shape != spec.shape) {
      std::string want, got;
      for (int d : spec.shape) want += std::to_string(d) + " ";
      for (int d : t.shape) got += std::to_string(d) + " ";
      throw std::runtime_error("weight validation: tensor '" + spec.name + "' has shape [ " + got +
                               "], manifest expects [ " + want + "]");
    }
  }
  if (store.tensor_count() != manifest.size())
    for (const auto& [name, _] : store.tensors()) {
      bool listed = false;
      for (const auto& spec : manifest) listed |= (spec.name == name);
      if (!listed) throw std::runtime_error("weight validation: unexpected tensor '" + name + "'");
    }
}

// ---- Weights container format: "UWT1", uint32 tensor count, then per
// ---- tensor: uint32 name length, UTF-8 name, uint32 ndim, uint32 dims[],
// ---- float32 LE payload.

inline std::string weights_to_bytes(const WeightStore& store) {
  std::string out = "UWT1";
  detail::put_u32_le(out, static_cast<std::uint32_t>(store.tensor_count()));
  for (const auto& [name, t] : store.tensors()) {
    detail::put_u32_le(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32_le(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::put_u32_le(out, static_cast<std::uint32_t>(d));
    for (float v : t.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      detail::put_u32_le(out, bits);
    }
  }
  return out;
}

inline WeightStore weights_from_bytes(const std::string& bytes, const std::string& origin = "<memory>") {
  const auto fail = [&](const std::string& why) -> std::runtime_error {
    return std::runtime_error("weight file parse error (" + origin + "): " + why);
  };
  if (bytes.size() < 8) throw fail("truncated: file shorter than the header");
  if (bytes.compare(0, 4, "UWT1") != 0) {
    if (bytes.compare(0, 3, "UWT") == 0) throw fail("unsupported format version '" + bytes.substr(0, 4) + "'");
    throw fail("bad magic, not a UWT weights file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t off = 4;
  const auto need = [&](std::size_t n, const char* what) {
    if (off + n > bytes.size()) throw fail(std::string("truncated while reading ") + what);
  };
  need(4, "tensor count");
  const std::uint32_t count = detail::get_u32_le(p + off);
  off += 4;

  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    need(4, "name length");
    const std::uint32_t name_len = detail::get_u32_le(p + off);
    off += 4;
    if (name_len > 4096) throw fail("implausible tensor name length");
    need(name_len, "name");
    std::string name(bytes, off, name_len);
    off += name_len;
    need(4, "rank");
    const std::uint32_t ndim = detail::get_u32_le(p + off);
    off += 4;
    if (ndim > 8) throw fail("implausible tensor rank for '" + name + "'");
    Tensor t;
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      need(4, "dimension");
      const std::uint32_t dim = detail::get_u32_le(p + off);
      off += 4;
      if (dim == 0 || dim > (1u << 24)) throw fail("implausible dimension for '" + name + "'");
      t.shape.push_back(static_cast<int>(dim));
      numel *= dim;
    }
    need(numel * 4, ("payload of '" + name + "'").c_str());
    t.values.resize(numel);
    for (std::size_t j = 0; j < numel; ++j) {
      const std::uint32_t bits = detail::get_u32_le(p + off);
      off += 4;
      float v;
      std::memcpy(&v, &bits, 4);
      t.values[j] = v;
    }
    store.add(name, std::move(t));
  }
  if (off != bytes.size()) throw fail("trailing bytes after last tensor");
  return store;
}

inline void save_weights(const std::string& path, const WeightStore& store) {
  detail::write_file_bytes(path, weights_to_bytes(store));
}

/// Parses and returns the full store, or throws without partial results.
inline WeightStore load_weights(const std::string& path) {
  return weights_from_bytes(detail::read_file_bytes(path), path);
}

/// Deterministic random store matching a manifest; scale ~ He-style fan-in
/// normalization. Intended for structural tests.
inline WeightStore random_weights(const std::vector<TensorSpec>& manifest, Rng& rng) {
  WeightStore store;
  for (const auto& spec : manifest) {
    Tensor t;
    t.shape = spec.shape;
    t.values.resize(spec.numel());
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < spec.shape.size(); ++d) fan_in *= static_cast<std::size_t>(spec.shape[d]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (float& v : t.values) v = static_cast<float>(scale * rng.next_gaussian());
    store.add(spec.name, std::move(t));
  }
  return store;
}

}  // namespace unfoldsr
