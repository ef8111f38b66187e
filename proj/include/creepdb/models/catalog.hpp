#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/models/model.hpp"

namespace creepdb::models {

inline constexpr int kCatalogVersion = 1;

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<ConstitutiveModel> models) : models_(std::move(models)) {}

  const std::vector<ConstitutiveModel>& models() const { return models_; }
  /// nullptr when absent.
  const ConstitutiveModel* find(std::string_view name) const;
  const ConstitutiveModel& at(std::string_view name) const;

  nlohmann::json to_json() const;
  static Catalog from_json(const nlohmann::json& j);
  static Catalog load(const std::string& path);

 private:
  std::vector<ConstitutiveModel> models_;
};

/// Norton, Norton-Bailey, theta projection, logarithmic creep, Duffing.
const Catalog& builtin_catalog();

}  // namespace creepdb::models
