#pragma once

#include <array>
#include <string_view>

namespace creepdb {

/// Controlled material-category vocabulary of the record store.
inline constexpr std::array<std::string_view, 11> kMaterialCategories{
    "nickel_alloy", "steel_iron", "polymer",  "rock",      "ice",   "ceramic",
    "aluminum_alloy", "titanium_alloy", "metallic_glass", "composite", "other"};

inline bool is_material_category(std::string_view c) {
  for (auto k : kMaterialCategories)
    if (k == c) return true;
  return false;
}

}  // namespace creepdb
