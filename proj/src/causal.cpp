#include "rhognf/causal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "rhognf/errors.hpp"

namespace rhognf {

namespace {

std::vector<double> outcome_noise(const std::vector<NoisePair>& pairs) {
    std::vector<double> z(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) z[i] = pairs[i].z_y;
    return z;
}

double intervention_value(const std::optional<DequantSpec>& treatment, double a) {
    if (!treatment) return a;
    if (a != std::floor(a)) throw InvalidInput("discrete treatment needs an integer class to intervene on");
    return treatment->center(static_cast<int>(a));
}

}  // namespace

std::vector<NoisePair> abduct_noise(const CopulaParam& rho, std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double r = rho.rho();
    const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
    std::vector<NoisePair> out(n);
    for (auto& p : out) {
        p.z_y = normal(rng);
        p.z_a = r * p.z_y + s * normal(rng);
    }
    return out;
}

double expected_potential_outcome(const FlowParams& model, double a, std::span<const double> z_y,
                                  const std::optional<DequantSpec>& outcome) {
    if (z_y.empty()) throw InvalidInput("expected_potential_outcome needs at least one noise draw");
    if (!std::isfinite(a)) throw InvalidInput("intervention value must be finite");
    FlowEvaluator ev(model);
    const RqSpline& spline = ev.outcome_spline(a);
    double sum = 0.0;
    if (outcome) {
        // decode(T^{-1}(z)) = k exactly when z lies between the images of the
        // class midpoints, so the bisection is skipped.
        const int top = outcome->n_classes - 1;
        std::vector<double> cut(static_cast<std::size_t>(top));
        for (int k = 0; k < top; ++k) cut[static_cast<std::size_t>(k)] = spline.eval(k + 0.5).value;
        for (double z : z_y) {
            const auto k = std::upper_bound(cut.begin(), cut.end(), z) - cut.begin();
            sum += static_cast<double>(k);
        }
    } else {
        for (double z : z_y) sum += spline.inverse(z);
    }
    return sum / static_cast<double>(z_y.size());
}

double expected_potential_outcome(const FlowParams& model, const CopulaParam& rho, double a,
                                  std::size_t n_samples, Rng& rng, const std::optional<DequantSpec>& outcome) {
    if (n_samples == 0) throw InvalidInput("n_samples must be positive");
    return expected_potential_outcome(model, a, outcome_noise(abduct_noise(rho, n_samples, rng)), outcome);
}

AceEstimate estimate_ace(const FlowParams& model, const CopulaParam& rho, double a1, double a0,
                         std::size_t n_samples, Rng& rng, const std::optional<DequantSpec>& outcome) {
    if (n_samples == 0) throw InvalidInput("n_samples must be positive");
    // The action step replaces z_A by the intervention, so only z_Y is kept.
    const auto z_y = outcome_noise(abduct_noise(rho, n_samples, rng));
    AceEstimate est;
    est.ey1 = expected_potential_outcome(model, a1, z_y, outcome);
    est.ey0 = expected_potential_outcome(model, a0, z_y, outcome);
    est.ace = est.ey1 - est.ey0;
    return est;
}

std::vector<double> default_rho_grid() {
    return {-0.99, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 0.99};
}

void SweepConfig::validate() const {
    if (grid.empty()) throw InvalidInput("rho grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(std::abs(grid[i]) < 1.0)) throw InvalidInput("rho grid values must lie strictly inside (-1, 1)");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidInput("rho grid must be strictly increasing");
    }
    if (n_samples == 0) throw InvalidInput("n_samples must be positive");
    if (coding.treatment) coding.treatment->validate();
    if (coding.outcome) coding.outcome->validate();
    intervention_value(coding.treatment, a1);
    intervention_value(coding.treatment, a0);
}

RhoCurve sweep_rho_curve(std::span<const Observation> data, const SweepConfig& config) {
    config.validate();
    const std::size_t n = config.grid.size();
    const double a1 = intervention_value(config.coding.treatment, config.a1);
    const double a0 = intervention_value(config.coding.treatment, config.a0);

    RhoCurve curve;
    curve.grid = config.grid;
    curve.rho_value_closed = rho_value_closed_form(data);
    curve.points.resize(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                TrainConfig tc = config.train;
                tc.rho = config.grid[i];
                tc.seed = config.train.seed + i;
                RhoCurvePoint& pt = curve.points[i];
                pt.rho = tc.rho;
                pt.fit = fit(data, tc);
                // Same Monte Carlo stream at every grid point.
                Rng mc(config.train.seed);
                const auto est = estimate_ace(pt.fit.final_params, CopulaParam(tc.rho), a1, a0, config.n_samples,
                                              mc, config.coding.outcome);
                pt.ace = est.ace;
                pt.ey1 = est.ey1;
                pt.ey0 = est.ey0;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw SweepError(config.grid[i], e.what());
        }
    }

    curve.bounds = curve_bounds(curve.points);
    curve.intercept_count = static_cast<int>(zero_crossings(curve.points).size());
    curve.rho_value_intercept = rho_value_from_curve(curve);
    return curve;
}

double rho_value_closed_form(std::span<const Observation> data) {
    if (data.size() < 2) throw InvalidInput("rho_value needs at least two observations");
    std::vector<double> a(data.size()), y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        a[i] = data[i].a;
        y[i] = data[i].y;
    }
    return rho_from_spearman(spearman_rho(a, y));
}

std::vector<double> zero_crossings(std::span<const RhoCurvePoint> points) {
    std::vector<double> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.ace == 0.0) {
            out.push_back(p.rho);
            continue;
        }
        if (i + 1 == points.size()) break;
        const auto& q = points[i + 1];
        if (q.ace != 0.0 && (p.ace < 0.0) != (q.ace < 0.0)) {
            const double t = p.ace / (p.ace - q.ace);
            out.push_back(p.rho + t * (q.rho - p.rho));
        }
    }
    return out;
}

std::optional<double> rho_value_from_curve(const RhoCurve& curve) {
    const auto xs = zero_crossings(curve.points);
    if (xs.empty()) return std::nullopt;
    return *std::min_element(xs.begin(), xs.end(), [&](double l, double r) {
        return std::abs(l - curve.rho_value_closed) < std::abs(r - curve.rho_value_closed);
    });
}

AceBounds curve_bounds(std::span<const RhoCurvePoint> points) {
    if (points.empty()) throw InvalidInput("bounds of an empty curve");
    AceBounds b{points.front().ace, points.front().ace};
    for (const auto& p : points) {
        b.lower = std::min(b.lower, p.ace);
        b.upper = std::max(b.upper, p.ace);
    }
    return b;
}

}  // namespace rhognf
