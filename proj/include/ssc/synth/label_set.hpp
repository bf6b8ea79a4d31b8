#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssc/core/error.hpp"

namespace ssc {

/// Ordered class names; index 0 is free space.
class LabelSet {
 public:
  LabelSet() : LabelSet(default_names()) {}
  explicit LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) throw DataError("label set needs free space plus one class");
    if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
      throw DataError("label set has duplicate names");
    }
  }

  // Free space, ceiling, floor, wall, window and seven object categories.
  static std::vector<std::string> default_names() {
    return {"empty", "ceiling", "floor", "wall",      "window",  "chair",
            "bed",   "sofa",    "table", "tvs",       "furniture", "objects"};
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::uint16_t> find(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::uint16_t>(it - names_.begin());
  }
  std::uint16_t index(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw DataError("unknown class '" + name + "'");
  }

 private:
  std::vector<std::string> names_;
};

}  // namespace ssc
