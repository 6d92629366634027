#pragma once

#include "json.hpp"
#include "rhognf/causal.hpp"
#include "rhognf/io.hpp"
#include "rhognf/trainer.hpp"

namespace rhognf {

nlohmann::json to_json(const Provenance& prov);
nlohmann::json to_json(const FlowHyper& hyper);
// History and scalar results; parameters go to their own file.
nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const AceBounds& bounds);
nlohmann::json to_json(const RhoCurve& curve);

// rho, ace, ey1, ey0 per grid point.
Table curve_table(const RhoCurve& curve);

}  // namespace rhognf
