#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rhognf/copula.hpp"
#include "rhognf/observation.hpp"
#include "rhognf/spline.hpp"

namespace rhognf {

enum class Activation { Tanh, Sigmoid };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

// Architecture descriptor shared by both transforms.
struct FlowHyper {
    int bins_a = 8;
    int bins_y = 8;
    std::vector<int> hidden{20, 15, 10};
    Activation activation = Activation::Tanh;
    Interval range_a{-3.0, 3.0};
    Interval range_y{-3.0, 3.0};
    // The conditioner sees (a_cond - cond_center) / cond_scale.
    double cond_center = 0.0;
    double cond_scale = 1.0;

    std::size_t treatment_param_count() const;
    std::size_t outcome_param_count() const;
    void validate() const;
};

bool operator==(const FlowHyper& lhs, const FlowHyper& rhs);

// Flat parameter vector: treatment spline raw parameters followed by the
// outcome conditioner (per layer: row-major weights, then biases).
struct FlowParams {
    FlowHyper hyper;
    std::vector<double> theta;

    // Zero treatment parameters and a zero conditioner output layer (so both
    // maps are the identity); hidden layers drawn uniformly in
    // +-1/sqrt(fan_in) from the seed.
    static FlowParams identity(const FlowHyper& hyper, std::uint64_t seed);

    std::span<const double> treatment() const;
    std::span<double> treatment();
    std::span<const double> outcome() const;
    std::span<double> outcome();
};

// Fully connected network a_cond -> outcome spline raw parameters.
class Conditioner {
public:
    explicit Conditioner(const FlowHyper& hyper);

    static std::size_t param_count(const FlowHyper& hyper);

    // Writes spline raw parameters for a_cond into `out` and keeps the
    // activations for a following backward().
    void forward(std::span<const double> weights, double a_cond, std::span<double> out);
    // Accumulates d(loss)/d(weights) given d(loss)/d(out) for the last
    // forward() call.
    void backward(std::span<const double> weights, std::span<const double> g_out,
                  std::span<double> g_weights);

    std::size_t output_size() const noexcept { return widths_.back(); }

private:
    double activate(double x) const noexcept;
    // derivative expressed through the activation output
    double activate_grad(double out) const noexcept;

    std::vector<std::size_t> widths_;  // input (1), hidden..., output
    Activation activation_;
    double center_;
    double scale_;
    std::vector<std::vector<double>> acts_;
    std::vector<std::vector<double>> grads_;
};

// Cached evaluation of both transforms for one parameter set. Not safe to
// share between threads; construct one per thread.
class FlowEvaluator {
public:
    explicit FlowEvaluator(const FlowParams& params);

    const FlowParams& params() const noexcept { return *params_; }
    // Rebuilds cached state after params.theta changed in place.
    void refresh();
    const RqSpline& treatment_spline() const noexcept { return spline_a_; }
    // Spline of the outcome transform conditioned on a_cond.
    const RqSpline& outcome_spline(double a_cond);

    // Mean negative log-likelihood over the batch; when `grad` is non-empty
    // the gradient of that mean is accumulated into it (sequential sum in
    // batch order).
    double nll(std::span<const Observation> batch, const CopulaParam& rho, std::span<double> grad);

private:
    const FlowParams* params_;
    RqSpline spline_a_;
    RqSpline spline_y_;
    Conditioner conditioner_;
    std::vector<double> raw_y_;
    std::vector<double> g_raw_y_;
};

TransformEval forward_a(const FlowParams& params, double a);
TransformEval forward_y(const FlowParams& params, double y, double a_cond);
double inverse_a(const FlowParams& params, double z);
double inverse_y(const FlowParams& params, double z, double a_cond);

// Gradient of the mean negative log-likelihood over the batch, same layout as
// params.theta. Throws InvalidInput for an empty batch and DegenerateCopula
// for |rho| >= 1.
std::vector<double> param_gradient(const FlowParams& params, std::span<const Observation> batch,
                                   const CopulaParam& rho);

// Text format, see docs/formats.md.
void save_params(const FlowParams& params, std::ostream& out);
FlowParams load_params(std::istream& in);

}  // namespace rhognf
