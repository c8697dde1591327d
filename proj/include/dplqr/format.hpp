#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace dplqr {

//! Shortest decimal representation that round-trips; "nan" for NaN.
inline std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

} // namespace dplqr
