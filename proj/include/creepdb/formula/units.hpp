#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/formula/dimension.hpp"

namespace creepdb::formula {

inline constexpr int kUnitTableVersion = 1;

/// One entry of the unit vocabulary: SI value = value * factor + offset.
struct UnitAtom {
  std::string tag;
  Dimension dimension;
  double factor = 1.0;
  double offset = 0.0;
  std::vector<std::string> aliases;
};

const std::vector<UnitAtom>& unit_atoms();

/// A parsed unit expression such as "J/(mol*K)" or "MPa^-n*s^-1". The SI
/// factor is factor * exp(sum(k_s * s)) so symbolic exponents can be resolved
/// once their values are known.
struct Unit {
  std::string tag;
  Dimension dimension;
  double factor = 1.0;
  std::map<std::string, double> log_terms;
  double offset = 0.0;  // only for single affine atoms (degC, degF)

  /// SI factor; throws Precondition if a symbolic exponent has no value.
  double si_factor(const std::map<std::string, double>& exponent_values = {}) const;
};

/// Throws UnknownUnit (or ParseError for malformed expressions).
Unit parse_unit(std::string_view tag);
Dimension unit_dimension(std::string_view tag);
bool is_known_unit(std::string_view tag);

/// Canonical unit for a dimension: K, MPa, s, dimensionless "1", otherwise SI
/// with stress factors expressed in MPa.
std::string canonical_tag(const Dimension& dim);

struct Quantity {
  double value = 0.0;
  std::string unit;
};

/// Converts to the canonical unit of the tag's dimension (degC -> K, ksi ->
/// MPa, h -> s, % -> fraction). `exponent_values` resolves symbolic unit
/// exponents such as the n in MPa^-n.
Quantity standardize(double value, std::string_view unit,
                     const std::map<std::string, double>& exponent_values = {});

/// Parses "31.6 MPa", "600 C", "sigma = 31.6 MPa" into a quantity in the
/// stated (not yet standardized) unit.
Quantity parse_quantity(std::string_view text);

/// Versioned vocabulary table: tag, dimension vector, factor and offset.
nlohmann::json unit_table_json();

}  // namespace creepdb::formula
