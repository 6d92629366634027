#pragma once

#include <random>

#include "rhognf/flow.hpp"

namespace rhognf::testing {

// Identity parameters with every coordinate perturbed by N(0, scale^2).
inline FlowParams random_params(const FlowHyper& hyper, std::uint64_t seed, double scale = 0.3) {
    FlowParams p = FlowParams::identity(hyper, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, scale);
    for (double& v : p.theta) v += normal(rng);
    return p;
}

inline FlowHyper small_hyper() {
    FlowHyper h;
    h.bins_a = 6;
    h.bins_y = 5;
    h.hidden = {7, 5};
    h.range_a = {-2.5, 3.0};
    h.range_y = {-3.0, 2.0};
    h.cond_center = 0.2;
    h.cond_scale = 1.3;
    return h;
}

// Central difference check with relative tolerance and a tiny absolute floor
// for coordinates whose true value is below round-off.
inline bool close_rel(double analytic, double numeric, double rtol, double atol = 1e-9) {
    return std::abs(analytic - numeric) <= rtol * std::max(std::abs(analytic), std::abs(numeric)) + atol;
}

}  // namespace rhognf::testing
