#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "unfoldsr/image.hpp"

namespace unfoldsr {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Read an 8- or 16-bit PNG into [0,1] doubles (division by the bit-depth
/// maximum). Palette images are expanded to RGB, alpha channels are dropped;
/// the result has 1 (gray) or 3 (RGB) channels.
inline Image read_png(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open PNG file: " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw std::runtime_error("not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  std::vector<png_byte> raw;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  const int channels =
      (color_type == PNG_COLOR_TYPE_GRAY) ? 1 :
      (color_type == PNG_COLOR_TYPE_RGB) ? 3 : -1;
  if (channels < 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported PNG color type in " + path);
  }

  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  raw.resize(stride * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = raw.data() + y * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(height), static_cast<int>(width), channels);
  const double max_val = (bit_depth == 16) ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = raw.data() + y * stride;
    for (png_uint_32 x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        double v;
        if (bit_depth == 16) {
          const std::size_t i = (static_cast<std::size_t>(x) * channels + c) * 2;
          v = static_cast<double>((row[i] << 8) | row[i + 1]);   // PNG 16-bit is big-endian
        } else {
          v = static_cast<double>(row[static_cast<std::size_t>(x) * channels + c]);
        }
        img.at(c, static_cast<int>(y), static_cast<int>(x)) = v / max_val;
      }
  }
  return img;
}

/// Write an image as 8- or 16-bit gray/RGB PNG. Values are clamped to [0,1]
/// at this export boundary and scaled by the bit-depth maximum.
inline void write_png(const std::string& path, const Image& img, int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("write_png: bit depth must be 8 or 16");
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_png: only 1- or 3-channel images");
  if (img.height < 1 || img.width < 1) throw std::invalid_argument("write_png: empty image");

  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open file for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               bit_depth, img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double max_val = (bit_depth == 16) ? 65535.0 : 255.0;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels * (bit_depth / 8);
  std::vector<png_byte> row(stride);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        const double clamped = std::clamp(img.at(c, y, x), 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(clamped * max_val));
        if (bit_depth == 16) {
          row[(static_cast<std::size_t>(x) * img.channels + c) * 2] = static_cast<png_byte>(q >> 8);
          row[(static_cast<std::size_t>(x) * img.channels + c) * 2 + 1] = static_cast<png_byte>(q & 0xff);
        } else {
          row[static_cast<std::size_t>(x) * img.channels + c] = static_cast<png_byte>(q);
        }
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace unfoldsr
