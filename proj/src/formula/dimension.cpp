#include "creepdb/formula/dimension.hpp"

#include <cmath>
#include <numeric>

#include "creepdb/error.hpp"

namespace creepdb::formula {

Rational::Rational(std::int64_t num, std::int64_t den) {
  require(den != 0, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
}

std::optional<Rational> Rational::from_double(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) return std::nullopt;
  for (std::int64_t d = 1; d <= max_den; ++d) {
    double n = std::round(value * static_cast<double>(d));
    if (std::abs(n) > 1e12) return std::nullopt;
    if (std::abs(n / static_cast<double>(d) - value) <= 1e-9)
      return Rational(static_cast<std::int64_t>(n), d);
  }
  return std::nullopt;
}

Rational operator+(Rational a, Rational b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator-(Rational a, Rational b) { return a + (-b); }
Rational operator*(Rational a, Rational b) { return Rational(a.num_ * b.num_, a.den_ * b.den_); }

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

// ---------------------------------------------------------------------------

Exponent Exponent::of_symbol(const std::string& name, Rational coefficient) {
  Exponent e;
  e.terms_[name] = coefficient;
  e.prune();
  return e;
}

void Exponent::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.is_zero())
      it = terms_.erase(it);
    else
      ++it;
  }
}

Exponent& Exponent::operator+=(const Exponent& other) {
  constant_ = constant_ + other.constant_;
  for (const auto& [name, k] : other.terms_) terms_[name] = terms_[name] + k;
  prune();
  return *this;
}

Exponent operator*(const Exponent& a, Rational k) {
  Exponent out;
  out.constant_ = a.constant_ * k;
  for (const auto& [name, c] : a.terms_) out.terms_[name] = c * k;
  out.prune();
  return out;
}

std::optional<Exponent> Exponent::multiply(const Exponent& a, const Exponent& b) {
  if (a.is_constant()) return b * a.constant();
  if (b.is_constant()) return a * b.constant();
  return std::nullopt;
}

std::optional<double> Exponent::evaluate(const std::map<std::string, double>& values) const {
  double v = constant_.to_double();
  for (const auto& [name, k] : terms_) {
    auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    v += k.to_double() * it->second;
  }
  return v;
}

std::string Exponent::str() const {
  std::string out;
  for (const auto& [name, k] : terms_) {
    std::string coef;
    if (k == Rational(1)) coef = "";
    else if (k == Rational(-1)) coef = "-";
    else coef = k.str() + "*";
    if (!out.empty() && coef.rfind('-', 0) != 0) out += "+";
    out += coef + name;
  }
  if (!constant_.is_zero() || out.empty()) {
    if (!out.empty() && constant_.num() > 0) out += "+";
    out += constant_.str();
  }
  return out;
}

// ---------------------------------------------------------------------------

Dimension Dimension::base(BaseDimension b, Rational power) {
  Dimension d;
  d.exps_[static_cast<std::size_t>(b)] = Exponent(power);
  return d;
}

Dimension Dimension::of(int length, int mass, int time, int temperature, int amount) {
  Dimension d;
  d.exps_ = {Exponent(Rational(length)), Exponent(Rational(mass)), Exponent(Rational(time)),
             Exponent(Rational(temperature)), Exponent(Rational(amount))};
  return d;
}

bool Dimension::dimensionless() const {
  for (const auto& e : exps_)
    if (!e.is_zero()) return false;
  return true;
}

bool Dimension::is_constant() const {
  for (const auto& e : exps_)
    if (!e.is_constant()) return false;
  return true;
}

Dimension operator*(const Dimension& a, const Dimension& b) {
  Dimension d;
  for (std::size_t i = 0; i < kBaseCount; ++i) d.exps_[i] = a.exps_[i] + b.exps_[i];
  return d;
}

Dimension operator/(const Dimension& a, const Dimension& b) {
  Dimension d;
  for (std::size_t i = 0; i < kBaseCount; ++i) d.exps_[i] = a.exps_[i] - b.exps_[i];
  return d;
}

std::optional<Dimension> Dimension::pow(const Exponent& power) const {
  Dimension d;
  for (std::size_t i = 0; i < kBaseCount; ++i) {
    auto e = Exponent::multiply(exps_[i], power);
    if (!e) return std::nullopt;
    d.exps_[i] = *e;
  }
  return d;
}

std::string Dimension::str() const {
  std::string out;
  for (std::size_t i = 0; i < kBaseCount; ++i) {
    if (exps_[i].is_zero()) continue;
    if (!out.empty()) out += "*";
    out += kBaseSymbols[i];
    if (!(exps_[i] == Exponent(Rational(1)))) {
      std::string e = exps_[i].str();
      bool simple = exps_[i].is_constant() && exps_[i].constant().den() == 1;
      out += "^" + (simple ? e : "(" + e + ")");
    }
  }
  return out.empty() ? "1" : out;
}

}  // namespace creepdb::formula
