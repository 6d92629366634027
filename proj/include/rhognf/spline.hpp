#pragma once

#include <span>
#include <vector>

namespace rhognf {

struct Interval {
    double lo = -3.0;
    double hi = 3.0;
    double width() const noexcept { return hi - lo; }
    double center() const noexcept { return 0.5 * (lo + hi); }
};

struct TransformEval {
    double value = 0.0;
    double log_deriv = 0.0;
};

// Monotone rational-quadratic spline on [lo, hi] with linear tails.
//
// Raw parameter layout, 3K + 2 unconstrained reals:
//   [0, K)        bin-width logits     w_k = W (m + (1 - K m) softmax(u)_k)
//   [K, 2K)       log bin heights      h_k = (W / K) exp(v_k)
//   [2K, 3K + 1)  log knot derivatives d_i = exp(s_i)
//   3K + 1        output offset c; the interval center maps to center + c
//                 before the bin shapes are applied.
// All-zero raw parameters give the identity map.
class RqSpline {
public:
    static constexpr double kMinWidthFraction = 1e-3;

    static std::size_t param_count(int bins) noexcept { return 3 * static_cast<std::size_t>(bins) + 2; }

    RqSpline() = default;
    RqSpline(int bins, Interval interval, std::span<const double> raw);

    // Re-initializes in place; reuses storage.
    void assign(int bins, Interval interval, std::span<const double> raw);

    int bins() const noexcept { return bins_; }
    const Interval& interval() const noexcept { return interval_; }

    TransformEval eval(double x) const noexcept;
    double derivative(double x) const noexcept;

    // Bisection to |eval(x).value - z| <= tol. Throws InversionFailure when no
    // bracket is found or the iteration budget is spent.
    double inverse(double z, double tol = 1e-9, int max_iter = 200) const;

    // Accumulates into grad_raw (size 3K + 2) the gradient of
    // g_value * value(x) + g_log_deriv * log_deriv(x) with respect to the raw
    // parameters.
    void backward(double x, double g_value, double g_log_deriv, std::span<double> grad_raw) const;

    std::span<const double> knots_x() const noexcept { return kx_; }
    std::span<const double> knots_y() const noexcept { return ky_; }
    std::span<const double> knot_derivs() const noexcept { return kd_; }

private:
    int locate(double x) const noexcept;

    int bins_ = 0;
    Interval interval_;
    std::vector<double> softmax_;  // K
    std::vector<double> heights_;  // K
    std::vector<double> kx_;       // K + 1
    std::vector<double> ky_;       // K + 1
    std::vector<double> kd_;       // K + 1
};

}  // namespace rhognf
