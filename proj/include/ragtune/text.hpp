#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ragtune {

// Shortest round-trip representation; keeps CSV/JSON output byte-stable
// across reruns and exact under reload.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("fmt_double: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(what + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(what + ": not a nonnegative integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace ragtune
