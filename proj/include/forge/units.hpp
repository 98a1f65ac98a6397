#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>

#include "forge/error.hpp"

namespace forge {

// Exact positive rational, used for channel scale factors and the constants
// of symbolic inequalities.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;

  constexpr Ratio() = default;
  constexpr Ratio(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }

  constexpr void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }

  friend constexpr bool operator==(const Ratio& a, const Ratio& b) { return a.num == b.num && a.den == b.den; }
  friend constexpr Ratio operator*(const Ratio& a, const Ratio& b) { return {a.num * b.num, a.den * b.den}; }

  std::string to_string() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  // Accepts "0.5", "1/2", "2".
  static Ratio parse(std::string_view text) {
    const std::string s(text);
    if (auto slash = s.find('/'); slash != std::string::npos) {
      try {
        return {std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
      } catch (const std::exception&) {
        throw DomainError("invalid ratio '" + s + "'");
      }
    }
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw DomainError("invalid ratio '" + s + "'");
    }
    if (pos != s.size() || !(v > 0)) throw DomainError("invalid ratio '" + s + "'");
    std::int64_t den = 1;
    while (std::abs(v * den - std::round(v * den)) > 1e-9 && den < 1'000'000) den *= 10;
    return {static_cast<std::int64_t>(std::llround(v * den)), den};
  }
};

inline double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

inline std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

// K = 1e3, M = 1e6.
inline std::string format_kilo(double count, int decimals = 2) { return fixed(count / 1e3, decimals) + "K"; }
inline std::string format_mega(double count, int decimals = 1) { return fixed(count / 1e6, decimals) + "M"; }
inline std::string format_seconds(double s, int decimals = 1) { return fixed(s, decimals) + " s"; }
inline std::string format_gib(double bytes, int decimals = 2) {
  return fixed(bytes / (1024.0 * 1024.0 * 1024.0), decimals) + " GiB";
}

// Parses a count with an optional K/M/G suffix ("26.1K", "559M", "1200").
inline double parse_scaled(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  double mult = 1;
  if (!s.empty()) {
    switch (s.back()) {
      case 'k':
      case 'K': mult = 1e3; s.pop_back(); break;
      case 'M': mult = 1e6; s.pop_back(); break;
      case 'G': mult = 1e9; s.pop_back(); break;
      default: break;
    }
  }
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DomainError("invalid number '" + std::string(text) + "'");
  }
  if (pos != s.size()) throw DomainError("invalid number '" + std::string(text) + "'");
  return v * mult;
}

}  // namespace forge
