#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "ssc/core/error.hpp"
#include "ssc/core/tensor.hpp"

namespace ssc {

// VXT1 layout: "VXT1", u8 dtype (0 = f32, 1 = f64), u8 rank, rank x u32 LE
// dims, then the little-endian payload.
namespace vxt {

inline constexpr char kMagic[4] = {'V', 'X', 'T', '1'};
enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? DType::kF32 : DType::kF64;
}

template <typename U>
void put_le(std::ostream& os, U v) {
  static_assert(std::is_trivially_copyable_v<U>);
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char b[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(U))) {
    throw DataError("unexpected end of stream");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
  }
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

}  // namespace vxt

template <typename T>
void write_vxt(std::ostream& os, const Tensor<T>& t) {
  os.write(vxt::kMagic, 4);
  vxt::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(vxt::dtype_of<T>()));
  vxt::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) vxt::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(T)));
  } else {
    for (T v : t.values()) vxt::put_le<T>(os, v);
  }
  if (!os) throw DataError("VXT1: write failed");
}

/// Reads a VXT1 tensor stored as either dtype, converting to T.
template <typename T>
Tensor<T> read_vxt(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, vxt::kMagic, 4) != 0) {
    throw DataError("VXT1: bad magic");
  }
  const auto dtype = vxt::get_le<std::uint8_t>(is);
  if (dtype > 1) throw DataError("VXT1: unknown dtype code " + std::to_string(dtype));
  const auto rank = vxt::get_le<std::uint8_t>(is);
  if (rank == 0) throw DataError("VXT1: rank 0");
  Shape shape(rank);
  for (auto& d : shape) {
    d = vxt::get_le<std::uint32_t>(is);
    if (d == 0) throw DataError("VXT1: zero-length axis");
  }
  const std::size_t n = shape_numel(shape);
  std::vector<T> data(n);
  if (dtype == static_cast<std::uint8_t>(vxt::dtype_of<T>()) &&
      std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(n * sizeof(T)))) {
      throw DataError("VXT1: truncated payload");
    }
  } else if (dtype == 0) {
    for (auto& v : data) v = static_cast<T>(vxt::get_le<float>(is));
  } else {
    for (auto& v : data) v = static_cast<T>(vxt::get_le<double>(is));
  }
  return Tensor<T>(std::move(shape), std::move(data));
}

template <typename T>
void save_vxt(const std::string& path, const Tensor<T>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  write_vxt(os, t);
}

template <typename T>
Tensor<T> load_vxt(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  try {
    return read_vxt<T>(is);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace ssc
