#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssc {

/// mt19937_64 with hand-rolled mappings. std distributions differ between
/// standard libraries, so seeded results would not be portable through them.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// FNV-1a, used to give each named parameter block its own stream.
inline std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ssc
