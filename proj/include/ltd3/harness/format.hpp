#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "ltd3/errors.hpp"

namespace ltd3 {

/// Shortest round-trip text for a double, independent of the C locale.
inline std::string format_full(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw NumericError("format_full: conversion failed");
  return std::string(buf, end);
}

/// Fixed four decimals for human-facing output.
inline std::string format_fixed4(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
  if (ec != std::errc{}) throw NumericError("format_fixed4: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& key) {
  if (s == "nan" || s == "auto") return std::nan("");
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("'" + std::string(s) + "' is not a number", key);
  return v;
}

inline std::size_t parse_count(std::string_view s, const std::string& key) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("'" + std::string(s) + "' is not a non-negative integer", key);
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace ltd3
