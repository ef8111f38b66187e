#include "creepdb/models/catalog.hpp"

#include <fstream>

#include "creepdb/error.hpp"

namespace creepdb::models {

namespace {

constexpr const char* kBuiltin = R"json({
  "version": 1,
  "models": [
    {
      "name": "norton",
      "kind": "rate",
      "equation": "d(eps)/d(t) = A*sigma^n*exp(-Q/(R*T))",
      "strain": "eps",
      "time": "t",
      "symbols": [
        {"name": "eps", "role": "strain", "unit": "1"},
        {"name": "t", "role": "time", "unit": "s"},
        {"name": "A", "role": "parameter", "unit": "MPa^-n*s^-1"},
        {"name": "sigma", "role": "stress", "unit": "MPa"},
        {"name": "n", "role": "parameter", "unit": "1"},
        {"name": "Q", "role": "activation_energy", "unit": "J/mol"},
        {"name": "R", "role": "gas_constant", "unit": "J/(mol*K)"},
        {"name": "T", "role": "temperature", "unit": "K"}
      ],
      "parameters": ["A", "n", "Q"],
      "conditions": ["sigma", "T"],
      "constants": {"R": 8.314462618},
      "defaults": {"A": 1e-10, "n": 4.0, "Q": 250000.0},
      "bounds": {"A": [0.0, 1e300], "n": [0.5, 15.0], "Q": [0.0, 1.5e6]}
    },
    {
      "name": "norton_bailey",
      "kind": "closed_form",
      "equation": "eps = A*sigma^n*t^m",
      "strain": "eps",
      "time": "t",
      "symbols": [
        {"name": "eps", "role": "strain", "unit": "1"},
        {"name": "t", "role": "time", "unit": "s"},
        {"name": "A", "role": "parameter", "unit": "MPa^-n*s^-m"},
        {"name": "sigma", "role": "stress", "unit": "MPa"},
        {"name": "n", "role": "parameter", "unit": "1"},
        {"name": "m", "role": "parameter", "unit": "1"}
      ],
      "parameters": ["A", "n", "m"],
      "conditions": ["sigma"],
      "defaults": {"A": 1e-8, "n": 3.0, "m": 0.4},
      "bounds": {"A": [0.0, 1e300], "n": [0.5, 15.0], "m": [0.01, 1.0]}
    },
    {
      "name": "theta_projection",
      "kind": "closed_form",
      "equation": "eps = theta1*(1 - exp(-theta2*t)) + theta3*(exp(theta4*t) - 1)",
      "strain": "eps",
      "time": "t",
      "symbols": [
        {"name": "eps", "role": "strain", "unit": "1"},
        {"name": "t", "role": "time", "unit": "s"},
        {"name": "theta1", "role": "parameter", "unit": "1"},
        {"name": "theta2", "role": "parameter", "unit": "1/s"},
        {"name": "theta3", "role": "parameter", "unit": "1"},
        {"name": "theta4", "role": "parameter", "unit": "1/s"}
      ],
      "parameters": ["theta1", "theta2", "theta3", "theta4"],
      "conditions": [],
      "defaults": {"theta1": 0.01, "theta2": 1e-4, "theta3": 0.001, "theta4": 1e-5},
      "bounds": {"theta1": [0.0, 1.0], "theta2": [0.0, 1e3], "theta3": [0.0, 1.0], "theta4": [0.0, 1e3]}
    },
    {
      "name": "logarithmic",
      "kind": "closed_form",
      "equation": "eps = eps0 + a*ln(1 + b*t)",
      "strain": "eps",
      "time": "t",
      "symbols": [
        {"name": "eps", "role": "strain", "unit": "1"},
        {"name": "t", "role": "time", "unit": "s"},
        {"name": "eps0", "role": "parameter", "unit": "1"},
        {"name": "a", "role": "parameter", "unit": "1"},
        {"name": "b", "role": "parameter", "unit": "1/s"}
      ],
      "parameters": ["eps0", "a", "b"],
      "conditions": [],
      "defaults": {"eps0": 0.0, "a": 0.01, "b": 0.01},
      "bounds": {"b": [0.0, 1e6]}
    },
    {
      "name": "duffing",
      "kind": "ode",
      "equation": "d^2(x)/d(t)^2 + delta*d(x)/d(t) + alpha*x + beta*x^3 = gamma*cos(omega*t)",
      "time": "t",
      "symbols": [
        {"name": "x", "role": "strain", "unit": "1"},
        {"name": "t", "role": "time", "unit": "s"},
        {"name": "delta", "role": "parameter", "unit": "1/s"},
        {"name": "alpha", "role": "parameter", "unit": "s^-2"},
        {"name": "beta", "role": "parameter", "unit": "s^-2"},
        {"name": "gamma", "role": "parameter", "unit": "s^-2"},
        {"name": "omega", "role": "parameter", "unit": "1/s"},
        {"name": "scale", "role": "parameter", "unit": "1"},
        {"name": "offset", "role": "parameter", "unit": "1"},
        {"name": "x0", "role": "parameter", "unit": "1"},
        {"name": "v0", "role": "parameter", "unit": "1/s"}
      ],
      "states": ["x", "v"],
      "rhs": ["v", "gamma*cos(omega*t) - delta*v - alpha*x - beta*x^3"],
      "initial": ["x0", "v0"],
      "observable": "scale*x + offset",
      "parameters": ["delta", "alpha", "beta", "gamma", "omega", "scale", "offset"],
      "conditions": [],
      "defaults": {"delta": 0.2, "alpha": 1.0, "beta": 1.0, "gamma": 0.3, "omega": 1.0, "scale": 0.01, "offset": 0.0},
      "bounds": {}
    }
  ]
})json";

}  // namespace

const ConstitutiveModel* Catalog::find(std::string_view name) const {
  for (const auto& m : models_)
    if (m.name() == name) return &m;
  return nullptr;
}

const ConstitutiveModel& Catalog::at(std::string_view name) const {
  const auto* m = find(name);
  if (!m) fail(ErrorCode::NotFound, "no catalog model named '" + std::string(name) + "'");
  return *m;
}

nlohmann::json Catalog::to_json() const {
  nlohmann::json j;
  j["version"] = kCatalogVersion;
  j["models"] = nlohmann::json::array();
  for (const auto& m : models_) j["models"].push_back(m.to_json());
  return j;
}

Catalog Catalog::from_json(const nlohmann::json& j) {
  int version = j.value("version", 0);
  require(version == kCatalogVersion,
          "unsupported catalog version " + std::to_string(version));
  std::vector<ConstitutiveModel> models;
  for (const auto& m : j.at("models")) models.push_back(ConstitutiveModel::from_json(m));
  return Catalog(std::move(models));
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingAsset, "cannot open catalog " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Precondition, "malformed catalog " + path + ": " + e.what());
  }
}

const Catalog& builtin_catalog() {
  static const Catalog catalog = Catalog::from_json(nlohmann::json::parse(kBuiltin));
  return catalog;
}

}  // namespace creepdb::models
