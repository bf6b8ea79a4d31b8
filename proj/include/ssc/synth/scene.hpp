#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ssc/geometry/camera.hpp"
#include "ssc/synth/label_set.hpp"

namespace ssc {

struct Box {
  Vec3 min{0, 0, 0};
  Vec3 max{0, 0, 0};

  bool contains(const Vec3& p) const {
    return p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1] &&
           p[2] >= min[2] && p[2] <= max[2];
  }
  double volume() const { return (max[0] - min[0]) * (max[1] - min[1]) * (max[2] - min[2]); }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Primitive {
  Box box;
  std::uint16_t label = 0;
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
  friend bool operator==(const Primitive&, const Primitive&) = default;
};

/// Axis-aligned solid boxes in a y-down world. Later primitives win where
/// they overlap.
struct SceneSpec {
  std::vector<Primitive> primitives;

  void add(const Box& box, std::uint16_t label, std::array<std::uint8_t, 3> rgb) {
    primitives.push_back({box, label, rgb});
  }

  void validate(const LabelSet& labels) const {
    for (const auto& p : primitives) {
      for (int a = 0; a < 3; ++a)
        if (!(p.box.max[a] > p.box.min[a])) throw DataError("scene: box with non-positive extent");
      if (p.label == 0 || p.label >= labels.size()) {
        throw DataError("scene: primitive label " + std::to_string(p.label) + " not an object class");
      }
    }
  }

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

inline constexpr double kSlabThickness = 0.3;
inline constexpr double kSlabHalfSpan = 20.0;

/// Text scene format, one primitive per line:
///   <class> <min x y z> <max x y z> <r g b>
/// plus shorthands for large slabs (0.3 m thick, 40 m across):
///   floor <y_top> <r g b>      ceiling <y_bottom> <r g b>
///   wall <x|z> <coord> <+|-> <r g b>   (slab on the + or - side of coord)
/// '#' starts a comment.
inline SceneSpec parse_scene(std::istream& is, const LabelSet& labels) {
  SceneSpec scene;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError("scene line " + std::to_string(line_no) + ": " + why);
  };
  auto read_rgb = [&](std::istringstream& ss) {
    std::array<std::uint8_t, 3> rgb{};
    for (auto& c : rgb) {
      int v;
      if (!(ss >> v) || v < 0 || v > 255) fail("bad colour");
      c = static_cast<std::uint8_t>(v);
    }
    return rgb;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    const double S = kSlabHalfSpan, T = kSlabThickness;
    // A slab written out in full keeps its class name, so the shorthand
    // keywords only apply to short lines.
    std::size_t tokens = 0;
    for (std::istringstream count(line); count >> std::ws && !count.eof(); ++tokens) {
      std::string tok;
      count >> tok;
    }
    const bool full_form = tokens == 10;
    if (!full_form && (head == "floor" || head == "ceiling")) {
      double level;
      if (!(ss >> level)) fail("missing level");
      const auto rgb = read_rgb(ss);
      Box b = head == "floor" ? Box{{-S, level, -S}, {S, level + T, S}}
                              : Box{{-S, level - T, -S}, {S, level, S}};
      scene.add(b, labels.index(head), rgb);
    } else if (!full_form && head == "wall") {
      std::string axis, side;
      double coord;
      if (!(ss >> axis >> coord >> side) || (axis != "x" && axis != "z") ||
          (side != "+" && side != "-")) {
        fail("expected: wall <x|z> <coord> <+|->");
      }
      const auto rgb = read_rgb(ss);
      const int a = axis == "x" ? 0 : 2;
      Box b{{-S, -S, -S}, {S, S, S}};
      b.min[a] = side == "+" ? coord : coord - T;
      b.max[a] = side == "+" ? coord + T : coord;
      scene.add(b, labels.index("wall"), rgb);
    } else {
      const auto label = labels.find(head);
      if (!label) fail("unknown class '" + head + "'");
      Box b;
      for (double& v : b.min)
        if (!(ss >> v)) fail("bad min corner");
      for (double& v : b.max)
        if (!(ss >> v)) fail("bad max corner");
      scene.add(b, *label, read_rgb(ss));
    }
    std::string extra;
    if (ss >> extra) fail("trailing token '" + extra + "'");
  }
  scene.validate(labels);
  return scene;
}

inline void write_scene(std::ostream& os, const SceneSpec& scene, const LabelSet& labels) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : scene.primitives) {
    os << labels.name(p.label);
    for (double v : p.box.min) os << ' ' << v;
    for (double v : p.box.max) os << ' ' << v;
    for (auto c : p.rgb) os << ' ' << static_cast<int>(c);
    os << '\n';
  }
}

inline SceneSpec load_scene(const std::string& path, const LabelSet& labels) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open scene file " + path);
  return parse_scene(is, labels);
}

}  // namespace ssc
