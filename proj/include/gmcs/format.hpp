#ifndef GMCS_FORMAT_HPP
#define GMCS_FORMAT_HPP

#include <cstdio>
#include <string>

namespace gmcs {

/// Fixed numeric formatting for all text outputs: 9 significant digits,
/// C locale ('.' decimal point).
inline std::string format_g9(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

}  // namespace gmcs

#endif  // GMCS_FORMAT_HPP
