#include "soilcn/targets.hpp"

#include "soilcn/common.hpp"

namespace soilcn {

const std::array<const char*, TargetOutputs::kCount>& TargetOutputs::names() {
    static const std::array<const char*, kCount> n = {
        "co2_rate", "nh3_rate", "n2o_rate", "no_rate",
        "c_stock",  "n_stock",  "n_inorg_stock"};
    return n;
}

double TargetOutputs::value(int i) const {
    switch (i) {
        case 0: return co2_rate;
        case 1: return nh3_rate;
        case 2: return n2o_rate;
        case 3: return no_rate;
        case 4: return c_stock;
        case 5: return n_stock;
        case 6: return n_inorg_stock;
    }
    throw DomainError("target index out of range");
}

}  // namespace soilcn
