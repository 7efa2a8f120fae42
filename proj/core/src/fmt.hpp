#pragma once

#include <charconv>
#include <string>

namespace pourl {

// Shortest round-trip decimal form, locale-independent; used everywhere a
// double lands in CSV or JSON so reruns are byte-identical.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace pourl
