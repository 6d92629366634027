#include "rhognf/report.hpp"

namespace rhognf {

using nlohmann::json;

json to_json(const Provenance& prov) {
    return {{"command", prov.command}, {"config_hash", hex64(prov.config_hash)}, {"seed", prov.seed}};
}

json to_json(const FlowHyper& h) {
    return {{"bins_a", h.bins_a},
            {"bins_y", h.bins_y},
            {"hidden", h.hidden},
            {"activation", to_string(h.activation)},
            {"range_a", {h.range_a.lo, h.range_a.hi}},
            {"range_y", {h.range_y.lo, h.range_y.hi}},
            {"cond_center", h.cond_center},
            {"cond_scale", h.cond_scale}};
}

json to_json(const FitReport& r) {
    json history = json::array();
    for (const auto& e : r.history) {
        history.push_back({{"epoch", e.epoch}, {"train_nll", e.train_nll}, {"val_nll", e.val_nll}});
    }
    return {{"rho", r.rho},
            {"train_nll", r.train_nll},
            {"val_nll", r.val_nll},
            {"test_nll", r.test_nll},
            {"epochs_run", r.epochs_run},
            {"best_epoch", r.best_epoch},
            {"n_train", r.n_train},
            {"n_val", r.n_val},
            {"n_test", r.n_test},
            {"architecture", to_json(r.final_params.hyper)},
            {"history", history}};
}

json to_json(const AceBounds& b) {
    return {{"lower", b.lower}, {"upper", b.upper}, {"width", b.width()}};
}

json to_json(const RhoCurve& c) {
    json points = json::array();
    for (const auto& p : c.points) {
        points.push_back({{"rho", p.rho},
                          {"ace", p.ace},
                          {"ey1", p.ey1},
                          {"ey0", p.ey0},
                          {"fit",
                           {{"train_nll", p.fit.train_nll},
                            {"val_nll", p.fit.val_nll},
                            {"test_nll", p.fit.test_nll},
                            {"epochs_run", p.fit.epochs_run},
                            {"best_epoch", p.fit.best_epoch}}}});
    }
    json out = {{"grid", c.grid},
                {"points", points},
                {"rho_value_closed", c.rho_value_closed},
                {"rho_value_intercept", nullptr},
                {"intercept_count", c.intercept_count},
                {"bounds", to_json(c.bounds)}};
    if (c.rho_value_intercept) out["rho_value_intercept"] = *c.rho_value_intercept;
    return out;
}

Table curve_table(const RhoCurve& curve) {
    Table t;
    t.header = {"rho", "ace", "ey1", "ey0"};
    for (const auto& p : curve.points) t.rows.push_back({p.rho, p.ace, p.ey1, p.ey0});
    return t;
}

}  // namespace rhognf
