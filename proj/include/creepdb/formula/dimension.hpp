#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace creepdb::formula {

/// Exact rational with a positive, reduced denominator.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_ == 0; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Nearest rational with denominator <= max_den if it reproduces `value`
  /// within 1e-9; nullopt otherwise.
  static std::optional<Rational> from_double(double value, std::int64_t max_den = 6);

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator-(Rational a) { return Rational(-a.num_, a.den_); }
  friend bool operator==(const Rational&, const Rational&) = default;

  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Exponent of one base dimension: a rational constant plus rational
/// multiples of dimensionless exponent symbols, e.g. `2n - 1` for the time
/// exponent of MPa^n.
class Exponent {
 public:
  Exponent() = default;
  Exponent(Rational constant) : constant_(constant) {}  // NOLINT(implicit)
  static Exponent of_symbol(const std::string& name, Rational coefficient = Rational(1));

  const Rational& constant() const noexcept { return constant_; }
  const std::map<std::string, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return constant_.is_zero() && terms_.empty(); }
  bool is_constant() const noexcept { return terms_.empty(); }

  Exponent& operator+=(const Exponent& other);
  friend Exponent operator+(Exponent a, const Exponent& b) { return a += b; }
  friend Exponent operator-(Exponent a, const Exponent& b) { return a += b * Rational(-1); }
  friend Exponent operator*(const Exponent& a, Rational k);
  /// Product of two affine forms; defined only when one side is constant.
  static std::optional<Exponent> multiply(const Exponent& a, const Exponent& b);

  friend bool operator==(const Exponent&, const Exponent&) = default;

  /// Numeric value once symbols are given values.
  std::optional<double> evaluate(const std::map<std::string, double>& values) const;

  std::string str() const;

 private:
  void prune();
  Rational constant_;
  std::map<std::string, Rational> terms_;
};

enum class BaseDimension { Length = 0, Mass, Time, Temperature, Amount };
inline constexpr std::size_t kBaseCount = 5;
inline constexpr std::array<const char*, kBaseCount> kBaseSymbols = {"m", "kg", "s", "K", "mol"};
inline constexpr std::array<const char*, kBaseCount> kBaseNames = {"length", "mass", "time",
                                                                     "temperature", "amount"};

/// Exponent vector over the five base dimensions; all zero means
/// dimensionless.
class Dimension {
 public:
  Dimension() = default;
  static Dimension base(BaseDimension b, Rational power = Rational(1));
  /// Builds from integer exponents (length, mass, time, temperature, amount).
  static Dimension of(int length, int mass, int time, int temperature = 0, int amount = 0);

  const Exponent& operator[](BaseDimension b) const { return exps_[static_cast<std::size_t>(b)]; }
  const Exponent& at(std::size_t i) const { return exps_.at(i); }
  Exponent& at(std::size_t i) { return exps_.at(i); }

  bool dimensionless() const;
  bool is_constant() const;

  friend Dimension operator*(const Dimension& a, const Dimension& b);
  friend Dimension operator/(const Dimension& a, const Dimension& b);
  /// Raise to an affine exponent; nullopt when that would need a product of
  /// two symbolic forms.
  std::optional<Dimension> pow(const Exponent& power) const;
  friend bool operator==(const Dimension&, const Dimension&) = default;

  /// Human form, e.g. "kg*m^-1*s^-2" or "1".
  std::string str() const;

 private:
  std::array<Exponent, kBaseCount> exps_{};
};

}  // namespace creepdb::formula
