#include "darboux/symcore/number.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace darboux {

namespace {

using i128 = __int128;

bool fits(i128 v) {
  return v <= static_cast<i128>(INT64_MAX) && v >= -static_cast<i128>(INT64_MAX);
}

Number float_number(double v) { return Number(v); }

Number make_exact(i128 num, i128 den, double fallback) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  if (!fits(num) || !fits(den)) return float_number(fallback);
  return Number::rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Number::Number(double value) : exact_(false), flt_(value == 0.0 ? 0.0 : value) {}

Number Number::rational(std::int64_t num, std::int64_t den) {
  Number n;
  if (den == 0) return Number(static_cast<double>(num) / 0.0);
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  n.num_ = num;
  n.den_ = den;
  return n;
}

double Number::value() const noexcept {
  return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : flt_;
}

Number Number::operator-() const {
  if (!exact_) return Number(-flt_);
  return Number::rational(-num_, den_);
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    i128 num = static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_;
    i128 den = static_cast<i128>(a.den_) * b.den_;
    return make_exact(num, den, a.value() + b.value());
  }
  return Number(a.value() + b.value());
}

Number operator*(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    i128 num = static_cast<i128>(a.num_) * b.num_;
    i128 den = static_cast<i128>(a.den_) * b.den_;
    return make_exact(num, den, a.value() * b.value());
  }
  return Number(a.value() * b.value());
}

Number operator/(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_ && b.num_ != 0) {
    i128 num = static_cast<i128>(a.num_) * b.den_;
    i128 den = static_cast<i128>(a.den_) * b.num_;
    return make_exact(num, den, a.value() / b.value());
  }
  return Number(a.value() / b.value());
}

Number Number::pow(std::int64_t exponent) const {
  if (exponent < 0) return Number(1) / pow(-exponent);
  if (!exact_) return Number(std::pow(flt_, static_cast<double>(exponent)));
  Number result(1);
  Number base = *this;
  std::int64_t e = exponent;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

std::string Number::to_string() const {
  if (exact_) {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }
  if (std::isnan(flt_)) return "nan";
  if (std::isinf(flt_)) return flt_ > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", flt_);
  std::string s(buf);
  // Keep a float marker so the literal re-parses as a float, not an integer.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace darboux
