// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace topobc {

// Exact fractions for link-strength exponents, state fractions and the
// closed-form sum-GDoF expressions. Inputs come from human-written configs,
// so int64 with 128-bit intermediates is more than enough headroom.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Best rational approximation with bounded denominator (continued fractions).
  // Returns nullopt when no fraction with den <= max_den comes within tol.
  static std::optional<Rational> from_double(double x, std::int64_t max_den, double tol = 1e-12) {
    if (!std::isfinite(x) || max_den < 1) return std::nullopt;
    const bool neg = x < 0;
    double v = std::fabs(x);
    if (v > 9.0e15) return std::nullopt;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double f = v;
    for (int it = 0; it < 64; ++it) {
      const double af = std::floor(f);
      if (af > 9.0e15) break;
      const auto a = static_cast<std::int64_t>(af);
      const i128 p2 = i128(a) * p1 + p0;
      const i128 q2 = i128(a) * q1 + q0;
      if (q2 > max_den || p2 > INT64_MAX) break;
      p0 = p1;
      q0 = q1;
      p1 = static_cast<std::int64_t>(p2);
      q1 = static_cast<std::int64_t>(q2);
      if (q1 >= 1 && std::fabs(v - static_cast<double>(p1) / static_cast<double>(q1)) <= tol)
        return Rational(neg ? -p1 : p1, q1);
      const double r = f - af;
      if (r < 1e-15) break;
      f = 1.0 / r;
    }
    if (q1 >= 1 && std::fabs(v - static_cast<double>(p1) / static_cast<double>(q1)) <= tol)
      return Rational(neg ? -p1 : p1, q1);
    return std::nullopt;
  }

 private:
  using i128 = __int128;

  static Rational make(i128 n, i128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      const i128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() { *this = make(num_, den_); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct ParsedRational {
  Rational value;
  bool exact = true;  // false when a decimal was snapped to a nearby fraction
};

// Accepts "p/q" or a decimal literal. Decimals are converted with bounded
// denominator; the caller surfaces a warning when the conversion is inexact.
inline ParsedRational parse_rational(const std::string& text, std::int64_t max_den = 1000) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::int64_t p = std::stoll(text.substr(0, slash));
    const std::int64_t q = std::stoll(text.substr(slash + 1));
    if (q <= 0) throw std::invalid_argument("rational '" + text + "' needs a positive denominator");
    return {Rational(p, q), true};
  }
  const double v = std::stod(text);
  if (auto r = Rational::from_double(v, max_den)) return {*r, true};
  // Snap to the closest representable fraction and flag the conversion.
  std::int64_t best_num = std::llround(v * static_cast<double>(max_den));
  return {Rational(best_num, max_den), false};
}

}  // namespace topobc
