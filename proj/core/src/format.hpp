#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace physue::detail {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string shortest_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

/// Fixed-point with `digits` decimals, for human-facing columns.
inline std::string fixed_double(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace physue::detail
