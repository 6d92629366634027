#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rhognf/codec.hpp"
#include "rhognf/copula.hpp"
#include "rhognf/dgp.hpp"
#include "rhognf/flow.hpp"
#include "rhognf/trainer.hpp"

namespace rhognf {

// Which columns are dequantized discrete variables.
struct VariableCoding {
    std::optional<DequantSpec> treatment;
    std::optional<DequantSpec> outcome;
};

struct AceEstimate {
    double ace = 0.0;
    double ey1 = 0.0;
    double ey0 = 0.0;
};

inline constexpr std::size_t kDefaultMcSamples = 100000;

// Abduction draws from Phi_rho. z_Y is drawn first and z_A from its
// conditional, so the z_Y stream depends on the rng only.
std::vector<NoisePair> abduct_noise(const CopulaParam& rho, std::size_t n, Rng& rng);

// Mean of T^{-1}_{Y|a}(z) over the given noise (decoded to classes when the
// outcome is discrete).
double expected_potential_outcome(const FlowParams& model, double a, std::span<const double> z_y,
                                  const std::optional<DequantSpec>& outcome = std::nullopt);
double expected_potential_outcome(const FlowParams& model, const CopulaParam& rho, double a,
                                  std::size_t n_samples, Rng& rng,
                                  const std::optional<DequantSpec>& outcome = std::nullopt);

// Both arms share the same z_Y draws.
AceEstimate estimate_ace(const FlowParams& model, const CopulaParam& rho, double a1, double a0,
                         std::size_t n_samples, Rng& rng,
                         const std::optional<DequantSpec>& outcome = std::nullopt);

std::vector<double> default_rho_grid();

struct SweepConfig {
    std::vector<double> grid = default_rho_grid();
    // Fit settings; the rho field is overwritten per grid point and the fit
    // seed of point i is train.seed + i.
    TrainConfig train;
    std::size_t n_samples = kDefaultMcSamples;
    // Intervention values; class indices when the treatment is discrete.
    double a1 = 1.0;
    double a0 = 0.0;
    VariableCoding coding;
    // 0 picks the hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct RhoCurvePoint {
    double rho = 0.0;
    double ace = 0.0;
    double ey1 = 0.0;
    double ey0 = 0.0;
    FitReport fit;
};

struct RhoCurve {
    std::vector<RhoCurvePoint> points;
    std::vector<double> grid;
    double rho_value_closed = 0.0;
    std::optional<double> rho_value_intercept;
    // Number of zero crossings; more than one means the curve wobbles and the
    // reported intercept is the one nearest the closed form.
    int intercept_count = 0;
    AceBounds bounds;
};

// Fits one model per grid value and estimates its ACE. Grid points run in
// parallel; the result is in grid order and independent of the thread count.
// Throws SweepError naming the rho of the first failing point.
RhoCurve sweep_rho_curve(std::span<const Observation> data, const SweepConfig& config);

// 2 sin(pi rho_S / 6) of the observed Spearman correlation.
double rho_value_closed_form(std::span<const Observation> data);

// Every rho where the piecewise-linear curve crosses zero, in grid order.
std::vector<double> zero_crossings(std::span<const RhoCurvePoint> points);
// Linear-interpolated crossing; with several, the one nearest
// curve.rho_value_closed.
std::optional<double> rho_value_from_curve(const RhoCurve& curve);

AceBounds curve_bounds(std::span<const RhoCurvePoint> points);

}  // namespace rhognf
