#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ssc/core/error.hpp"
#include "ssc/encodings/colour.hpp"
#include "ssc/geometry/camera.hpp"

namespace ssc {

namespace png_detail {

struct File {
  std::FILE* f = nullptr;
  File(const std::string& path, const char* mode) : f(std::fopen(path.c_str(), mode)) {}
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

struct Header {
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, colour_type = 0;
};

// The libpng calls live in functions that construct no C++ objects after
// setjmp, so a longjmp skips no destructors.
inline bool read_header(png_structp png, png_infop info, std::FILE* f, Header& h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, f);
  png_read_info(png, info);
  png_get_IHDR(png, info, &h.width, &h.height, &h.bit_depth, &h.colour_type, nullptr, nullptr, nullptr);
  return true;
}

inline bool read_rows(png_structp png, png_infop info, png_bytep data, std::size_t stride,
                      png_uint_32 height) {
  if (setjmp(png_jmpbuf(png))) return false;
  for (png_uint_32 y = 0; y < height; ++y) png_read_row(png, data + y * stride, nullptr);
  png_read_end(png, info);
  return true;
}

inline bool write_image(std::FILE* f, png_uint_32 width, png_uint_32 height, int bit_depth, int colour_type,
                        png_bytep data, std::size_t stride) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, width, height, bit_depth, colour_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (png_uint_32 y = 0; y < height; ++y) png_write_row(png, data + y * stride);
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return true;
}

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), file_(path, "rb") {
    if (!file_.f) throw DataError("cannot open " + path);
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file_.f) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      throw DataError(path + ": not a PNG file");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png_) info_ = png_create_info_struct(png_);
    if (!png_ || !info_) throw DataError(path + ": libpng initialisation failed");
    png_set_sig_bytes(png_, 8);
    if (!read_header(png_, info_, file_.f, header_)) throw DataError(path + ": corrupt PNG header");
  }
  ~Reader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const Header& header() const { return header_; }
  png_structp png() { return png_; }
  png_infop info() { return info_; }

  void rows(png_bytep data, std::size_t stride) {
    png_read_update_info(png_, info_);
    if (png_get_rowbytes(png_, info_) != stride) throw DataError(path_ + ": unexpected row size");
    if (!read_rows(png_, info_, data, stride, header_.height)) throw DataError(path_ + ": corrupt PNG data");
  }

 private:
  std::string path_;
  File file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
  Header header_;
};

}  // namespace png_detail

/// Any PNG is converted to 8-bit RGB; alpha is dropped.
inline RgbImage read_rgb_png(const std::string& path) {
  png_detail::Reader r(path);
  const auto& h = r.header();
  png_structp png = r.png();
  if (h.colour_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (h.colour_type == PNG_COLOR_TYPE_GRAY && h.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (h.bit_depth == 16) png_set_strip_16(png);
  if (h.colour_type == PNG_COLOR_TYPE_GRAY || h.colour_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (h.colour_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, r.info(), PNG_INFO_tRNS)) png_set_strip_alpha(png);
  RgbImage img(static_cast<int>(h.width), static_cast<int>(h.height));
  r.rows(img.data.data(), static_cast<std::size_t>(h.width) * 3);
  return img;
}

inline void write_rgb_png(const std::string& path, const RgbImage& img) {
  if (img.width < 1 || img.height < 1 || img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ShapeError("write_rgb_png: image buffer does not match its size");
  }
  png_detail::File f(path, "wb");
  if (!f.f) throw DataError("cannot write " + path);
  std::vector<png_byte> rows(img.data.begin(), img.data.end());
  if (!png_detail::write_image(f.f, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows.data(),
                               static_cast<std::size_t>(img.width) * 3)) {
    throw DataError("libpng failed writing " + path);
  }
}

/// 16-bit single channel, millimetres, 0 = invalid.
inline DepthMap read_depth_png(const std::string& path) {
  png_detail::Reader r(path);
  const auto& h = r.header();
  if (h.bit_depth != 16 || h.colour_type != PNG_COLOR_TYPE_GRAY) {
    throw DataError(path + ": depth PNG must be 16-bit single channel");
  }
  std::vector<png_byte> be(static_cast<std::size_t>(h.width) * h.height * 2);
  r.rows(be.data(), static_cast<std::size_t>(h.width) * 2);
  DepthMap d(static_cast<int>(h.width), static_cast<int>(h.height));
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    const unsigned mm = (unsigned{be[2 * i]} << 8) | be[2 * i + 1];
    if (mm == 0) continue;
    d.depth[i] = static_cast<float>(mm) / 1000.f;
    d.valid[i] = 1;
  }
  return d;
}

/// Depths round to the nearest millimetre; beyond 65.535 m they are stored as
/// invalid.
inline void write_depth_png(const std::string& path, const DepthMap& d) {
  const std::size_t n = static_cast<std::size_t>(d.width) * d.height;
  if (d.width < 1 || d.height < 1 || d.depth.size() != n || d.valid.size() != n) {
    throw ShapeError("write_depth_png: depth buffer does not match its size");
  }
  std::vector<png_byte> be(2 * n, 0);  // PNG stores 16-bit samples big-endian
  for (std::size_t i = 0; i < n; ++i) {
    if (!d.valid[i] || !(d.depth[i] > 0)) continue;
    const double v = std::round(static_cast<double>(d.depth[i]) * 1000.0);
    if (v < 1 || v > 65535) continue;
    const auto mm = static_cast<unsigned>(v);
    be[2 * i] = static_cast<png_byte>(mm >> 8);
    be[2 * i + 1] = static_cast<png_byte>(mm & 0xff);
  }
  png_detail::File f(path, "wb");
  if (!f.f) throw DataError("cannot write " + path);
  if (!png_detail::write_image(f.f, d.width, d.height, 16, PNG_COLOR_TYPE_GRAY,
                               be.data(), static_cast<std::size_t>(d.width) * 2)) {
    throw DataError("libpng failed writing " + path);
  }
}

}  // namespace ssc
