#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace layerlab {

/// Shortest-safe round-trip text for a double: 17 significant digits.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Compact label for file names, e.g. eps = 0.05 -> "0.05".
inline std::string fmt_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace layerlab
