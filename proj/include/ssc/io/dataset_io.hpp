#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ssc/core/vxt_io.hpp"
#include "ssc/io/config.hpp"
#include "ssc/io/png.hpp"
#include "ssc/training/examples.hpp"

namespace ssc {

namespace fs = std::filesystem;

// Dataset directory:
//   manifest.txt      key=value: format, seed, grid, max range, labels, samples
//   intrinsics.txt    fx, fy, cx, cy, width, height
//   <id>/rgb.png      8-bit RGB
//   <id>/depth.png    16-bit millimetres, 0 = invalid
//   <id>/depth.vxt    H x W metres, 0 = invalid (exact copy of the render)
//   <id>/pose.txt     camera-to-world rotation (row-major) and translation
//   <id>/scene.txt    primitives
//   <id>/labels.vxt, <id>/visibility.vxt   1 x D x H x W class codes
//   <id>/ftsdf.vxt, <id>/colour.vxt        written by encode
inline constexpr const char* kDatasetFormat = "ssc-dataset-1";

inline std::string format_real(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_reals(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + format_real(v[i]);
  return s;
}

template <typename V>
Tensor<float> volume_tensor(const Volume<V>& v) {
  Tensor<float> t(Shape{1, v.dims.d, v.dims.h, v.dims.w});
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = static_cast<float>(v[i]);
  return t;
}

/// Integer codes in [0, limit) back to a volume.
template <typename V>
Volume<V> tensor_volume(const Tensor<float>& t, std::size_t limit, const std::string& what) {
  if (t.rank() != 4 || t.shape()[0] != 1) throw DataError(what + ": expected a 1 x D x H x W tensor");
  Volume<V> v(Dims3{t.shape()[1], t.shape()[2], t.shape()[3]});
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float x = t[i];
    if (!(x >= 0) || x >= static_cast<float>(limit) || x != std::floor(x)) {
      throw DataError(what + ": value " + format_real(x) + " is not a code below " + std::to_string(limit));
    }
    v[i] = static_cast<V>(x);
  }
  return v;
}

inline void save_labels(const std::string& path, const LabelVolume& l) { save_vxt(path, volume_tensor(l)); }
inline LabelVolume load_labels(const std::string& path, std::size_t classes) {
  return tensor_volume<std::uint16_t>(load_vxt<float>(path), classes, path);
}

inline void save_visibility(const std::string& path, const VisibilityVolume& v) {
  save_vxt(path, volume_tensor(v));
}
inline VisibilityVolume load_visibility(const std::string& path) {
  return tensor_volume<Visibility>(load_vxt<float>(path), 4, path);
}

inline Tensor<float> depth_tensor(const DepthMap& d) {
  Tensor<float> t(Shape{static_cast<std::size_t>(d.height), static_cast<std::size_t>(d.width)}, 0.f);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (d.valid[i]) t[i] = d.depth[i];
  return t;
}

inline DepthMap tensor_depth(const Tensor<float>& t, const std::string& what) {
  if (t.rank() != 2) throw DataError(what + ": expected an H x W depth tensor");
  DepthMap d(static_cast<int>(t.shape()[1]), static_cast<int>(t.shape()[0]));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || t[i] < 0) throw DataError(what + ": depth must be finite and >= 0");
    d.depth[i] = t[i];
    d.valid[i] = t[i] > 0;
  }
  return d;
}

/// Metres from a VXT1 tensor, millimetres from a 16-bit PNG.
inline DepthMap load_depth(const std::string& path) {
  if (fs::path(path).extension() == ".png") return read_depth_png(path);
  return tensor_depth(load_vxt<float>(path), path);
}

inline void save_pose(const std::string& path, const Pose& p) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  os << "rotation=" << format_reals(p.rotation.data(), 9) << '\n'
     << "translation=" << format_reals(p.translation.data(), 3) << '\n';
}

inline Pose load_pose(const std::string& path) {
  const Config c = Config::load(path);
  c.require_known({"rotation", "translation"});
  const auto r = c.reals("rotation"), t = c.reals("translation");
  if (r.size() != 9 || t.size() != 3) throw DataError(path + ": rotation needs 9 values, translation 3");
  Pose p;
  std::copy(r.begin(), r.end(), p.rotation.begin());
  std::copy(t.begin(), t.end(), p.translation.begin());
  p.validate();
  return p;
}

inline void write_intrinsics(Config& c, const CameraIntrinsics& k) {
  c.set("fx", format_real(k.fx));
  c.set("fy", format_real(k.fy));
  c.set("cx", format_real(k.cx));
  c.set("cy", format_real(k.cy));
  c.set("image_width", std::to_string(k.width));
  c.set("image_height", std::to_string(k.height));
}

/// Every field must be present; there is no implied camera.
inline CameraIntrinsics read_intrinsics(const Config& c) {
  for (const char* key : {"fx", "fy", "cx", "cy", "image_width", "image_height"})
    if (!c.has(key)) throw DataError(std::string("intrinsics: missing '") + key + "'");
  CameraIntrinsics k{c.real("fx"), c.real("fy"), c.real("cx"), c.real("cy"),
                     static_cast<int>(c.integer("image_width")), static_cast<int>(c.integer("image_height"))};
  k.validate();
  return k;
}

inline void save_intrinsics(const std::string& path, const CameraIntrinsics& k) {
  Config c;
  write_intrinsics(c, k);
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  c.write(os);
}

inline CameraIntrinsics load_intrinsics(const std::string& path) {
  const Config c = Config::load(path);
  c.require_known({"fx", "fy", "cx", "cy", "image_width", "image_height"});
  return read_intrinsics(c);
}

inline void write_grid(Config& c, const VoxelGrid& g) {
  c.set("grid_origin", format_reals(g.origin.data(), 3));
  c.set("voxel_size", format_real(g.voxel_size));
  c.set("grid_dims", std::to_string(g.dims.d) + " " + std::to_string(g.dims.h) + " " + std::to_string(g.dims.w));
}

inline VoxelGrid read_grid(const Config& c, const VoxelGrid& fallback = default_grid()) {
  VoxelGrid g = fallback;
  const auto o = c.reals("grid_origin", {g.origin[0], g.origin[1], g.origin[2]});
  const auto d = c.reals("grid_dims", {double(g.dims.d), double(g.dims.h), double(g.dims.w)});
  if (o.size() != 3 || d.size() != 3) throw DataError("grid_origin and grid_dims need 3 values each");
  for (double v : d)
    if (!(v >= 1) || v != std::floor(v)) throw DataError("grid_dims must be positive integers");
  g.origin = {o[0], o[1], o[2]};
  g.voxel_size = c.real("voxel_size", g.voxel_size);
  g.dims = {std::size_t(d[0]), std::size_t(d[1]), std::size_t(d[2])};
  g.validate();
  return g;
}

struct DatasetInfo {
  std::uint64_t seed = 0;
  VoxelGrid grid = default_grid();
  CameraIntrinsics intrinsics = default_intrinsics();
  double max_range = 10.0;
  LabelSet labels;
  std::vector<std::string> ids;
};

inline std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + v[i];
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

inline void write_manifest(const std::string& dir, const DatasetInfo& info) {
  Config c;
  c.set("format", kDatasetFormat);
  c.set("seed", std::to_string(info.seed));
  write_grid(c, info.grid);
  c.set("max_range", format_real(info.max_range));
  c.set("labels", join(info.labels.names(), ','));
  c.set("count", std::to_string(info.ids.size()));
  c.set("samples", join(info.ids, ','));
  std::ofstream os(fs::path(dir) / "manifest.txt");
  if (!os) throw DataError("cannot write manifest in " + dir);
  c.write(os);
  save_intrinsics((fs::path(dir) / "intrinsics.txt").string(), info.intrinsics);
}

inline DatasetInfo read_manifest(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.txt").string();
  if (!fs::exists(path)) throw DataError("no dataset manifest at " + path);
  const Config c = Config::load(path);
  if (c.str("format", "") != kDatasetFormat) throw DataError(path + ": not an " + std::string(kDatasetFormat) + " manifest");
  DatasetInfo info;
  info.seed = static_cast<std::uint64_t>(c.integer("seed", 0));
  info.grid = read_grid(c);
  info.max_range = c.real("max_range", info.max_range);
  info.labels = LabelSet(split(c.str("labels"), ','));
  info.ids = split(c.str("samples", ""), ',');
  if (info.ids.empty()) throw DataError(path + ": dataset lists no samples");
  if (static_cast<std::size_t>(c.integer("count")) != info.ids.size()) {
    throw DataError(path + ": count does not match the sample list");
  }
  info.intrinsics = load_intrinsics((fs::path(dir) / "intrinsics.txt").string());
  return info;
}

inline void save_sample(const std::string& dir, const Sample& s, const LabelSet& labels) {
  const fs::path d = fs::path(dir) / s.id;
  fs::create_directories(d);
  write_rgb_png((d / "rgb.png").string(), s.rgb);
  write_depth_png((d / "depth.png").string(), s.depth);
  save_vxt((d / "depth.vxt").string(), depth_tensor(s.depth));
  save_pose((d / "pose.txt").string(), s.pose);
  {
    std::ofstream os(d / "scene.txt");
    if (!os) throw DataError("cannot write " + (d / "scene.txt").string());
    write_scene(os, s.scene, labels);
  }
  save_labels((d / "labels.vxt").string(), s.labels);
  save_visibility((d / "visibility.vxt").string(), s.visibility);
}

/// Writes every sample and then the manifest, so a manifest only appears for
/// a complete dataset.
inline void save_dataset(const std::string& dir, const std::vector<Sample>& samples, DatasetInfo info) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create dataset directory " + dir);
  info.ids.clear();
  for (const auto& s : samples) {
    save_sample(dir, s, info.labels);
    info.ids.push_back(s.id);
  }
  write_manifest(dir, info);
}

inline Sample load_sample(const std::string& dir, const std::string& id, const DatasetInfo& info) {
  const fs::path d = fs::path(dir) / id;
  Sample s;
  s.id = id;
  s.scene = load_scene((d / "scene.txt").string(), info.labels);
  s.pose = load_pose((d / "pose.txt").string());
  s.rgb = read_rgb_png((d / "rgb.png").string());
  s.depth = fs::exists(d / "depth.vxt") ? load_depth((d / "depth.vxt").string())
                                        : load_depth((d / "depth.png").string());
  s.labels = load_labels((d / "labels.vxt").string(), info.labels.size());
  s.visibility = load_visibility((d / "visibility.vxt").string());
  if (!(s.labels.dims == info.grid.dims) || !(s.visibility.dims == info.grid.dims)) {
    throw DataError(d.string() + ": volumes do not match the manifest grid " + info.grid.dims.str());
  }
  if (s.rgb.width != info.intrinsics.width || s.rgb.height != info.intrinsics.height ||
      s.depth.width != info.intrinsics.width || s.depth.height != info.intrinsics.height) {
    throw DataError(d.string() + ": images do not match the intrinsics");
  }
  return s;
}

inline void save_encoded(const std::string& dir, const EncodedSample& e) {
  const fs::path d = fs::path(dir) / e.id;
  save_vxt((d / "ftsdf.vxt").string(), e.ftsdf);
  save_vxt((d / "colour.vxt").string(), e.colour);
}

/// Uses the stored encodings when encode has run, otherwise encodes from the
/// raw sample.
inline EncodedSample load_encoded(const std::string& dir, const std::string& id, const DatasetInfo& info,
                                  double tau = 4.0) {
  const fs::path d = fs::path(dir) / id;
  if (!fs::exists(d / "ftsdf.vxt") || !fs::exists(d / "colour.vxt")) {
    return encode_sample(load_sample(dir, id, info), info.intrinsics, info.grid, tau, info.max_range);
  }
  EncodedSample e;
  e.id = id;
  e.ftsdf = load_vxt<float>((d / "ftsdf.vxt").string());
  e.colour = load_vxt<float>((d / "colour.vxt").string());
  e.labels = load_labels((d / "labels.vxt").string(), info.labels.size());
  e.visibility = load_visibility((d / "visibility.vxt").string());
  const Dims3 g = info.grid.dims;
  if (e.ftsdf.shape() != Shape{1, g.d, g.h, g.w} || e.colour.shape() != Shape{3, g.d, g.h, g.w} ||
      !(e.labels.dims == g) || !(e.visibility.dims == g)) {
    throw DataError(d.string() + ": encodings do not match the manifest grid " + g.str());
  }
  return e;
}

inline std::vector<EncodedSample> load_encoded_dataset(const std::string& dir, const DatasetInfo& info,
                                                       double tau = 4.0) {
  std::vector<EncodedSample> out;
  out.reserve(info.ids.size());
  for (const auto& id : info.ids) out.push_back(load_encoded(dir, id, info, tau));
  return out;
}

}  // namespace ssc
