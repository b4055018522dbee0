#pragma once

#include <charconv>
#include <string>
#include <vector>

namespace gkflab {

/// Fixed notation with `digits` decimals, '.' separator, independent of the
/// global locale.
inline std::string format_fixed(double value, int digits = 6) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, digits);
  if (res.ec != std::errc{}) return "nan";
  std::string out(buf, res.ptr);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

inline std::string join_fixed(const std::vector<double>& values, char sep = ',',
                              int digits = 6) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_fixed(values[i], digits);
  }
  return out;
}

}  // namespace gkflab
