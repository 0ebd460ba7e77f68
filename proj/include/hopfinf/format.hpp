#pragma once

#include <charconv>
#include <string>

#include "hopfinf/geometry.hpp"

namespace hopfinf {

/// Shortest round-trip decimal text.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(Vec2 z) { return "(" + fmt(z.x) + ", " + fmt(z.y) + ")"; }

}  // namespace hopfinf
