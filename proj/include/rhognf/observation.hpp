#pragma once

#include <vector>

namespace rhognf {

// One observational (treatment, outcome) pair, in model space (discrete
// columns already dequantized).
struct Observation {
    double a = 0.0;
    double y = 0.0;
};

using Dataset = std::vector<Observation>;

}  // namespace rhognf
