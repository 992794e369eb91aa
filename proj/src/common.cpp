#include "soilcn/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace soilcn {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace soilcn
