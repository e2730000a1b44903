#pragma once

#include <cstdint>
#include <string>

namespace darboux {

/// A scalar constant: an exact rational when it fits in 64 bits, a double otherwise.
/// Arithmetic between exact values stays exact until an overflow forces a float.
class Number {
 public:
  constexpr Number() = default;
  Number(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  Number(int value) : Number(static_cast<std::int64_t>(value)) {}  // NOLINT
  explicit Number(double value);

  static Number rational(std::int64_t num, std::int64_t den);

  bool is_exact() const noexcept { return exact_; }
  bool is_integer() const noexcept { return exact_ && den_ == 1; }
  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }
  double value() const noexcept;

  bool is_zero() const noexcept { return exact_ ? num_ == 0 : flt_ == 0.0; }
  bool is_one() const noexcept { return exact_ ? (num_ == 1 && den_ == 1) : flt_ == 1.0; }
  bool is_negative() const noexcept { return value() < 0.0; }

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b) { return a + (-b); }
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);
  Number& operator+=(const Number& o) { return *this = *this + o; }
  Number& operator*=(const Number& o) { return *this = *this * o; }

  /// Integer power; exact for exact bases when no overflow occurs.
  Number pow(std::int64_t exponent) const;

  /// Equality by numeric value, so 1/2 and 0.5 compare equal.
  friend bool operator==(const Number& a, const Number& b) { return a.value() == b.value(); }
  friend bool operator<(const Number& a, const Number& b) { return a.value() < b.value(); }

  /// Text that parses back to the same value: "p/q" for rationals, 17 digits for floats.
  std::string to_string() const;

 private:
  bool exact_ = true;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double flt_ = 0.0;
};

}  // namespace darboux
