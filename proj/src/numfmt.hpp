#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace walkbounds::detail {

// Shortest round-trip decimal form; empty for NaN.
inline std::string num(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Fixed number of significant digits, for human tables.
inline std::string num(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

}  // namespace walkbounds::detail
