#include "rhognf/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rhognf/errors.hpp"

namespace rhognf {

RqSpline::RqSpline(int bins, Interval interval, std::span<const double> raw) {
    assign(bins, interval, raw);
}

void RqSpline::assign(int bins, Interval interval, std::span<const double> raw) {
    if (bins < 1) throw InvalidParameter("spline needs at least one bin");
    if (!(interval.hi > interval.lo)) throw InvalidParameter("spline interval is empty");
    if (raw.size() != param_count(bins)) throw InvalidParameter("spline raw parameter size mismatch");

    const std::size_t k = static_cast<std::size_t>(bins);
    bins_ = bins;
    interval_ = interval;
    softmax_.resize(k);
    heights_.resize(k);
    kx_.resize(k + 1);
    ky_.resize(k + 1);
    kd_.resize(k + 1);

    const double width = interval.width();
    const double min_frac = kMinWidthFraction;
    const double free_frac = 1.0 - static_cast<double>(k) * min_frac;

    const double umax = *std::max_element(raw.begin(), raw.begin() + bins);
    double zsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        softmax_[i] = std::exp(raw[i] - umax);
        zsum += softmax_[i];
    }
    kx_[0] = interval.lo;
    for (std::size_t i = 0; i < k; ++i) {
        softmax_[i] /= zsum;
        kx_[i + 1] = kx_[i] + width * (min_frac + free_frac * softmax_[i]);
    }
    kx_[k] = interval.hi;

    const double base_h = width / static_cast<double>(k);
    double total_h = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        heights_[i] = base_h * std::exp(raw[k + i]);
        total_h += heights_[i];
    }
    ky_[0] = interval.center() + raw[3 * k + 1] - 0.5 * total_h;
    for (std::size_t i = 0; i < k; ++i) ky_[i + 1] = ky_[i] + heights_[i];

    for (std::size_t i = 0; i <= k; ++i) kd_[i] = std::exp(raw[2 * k + i]);
}

int RqSpline::locate(double x) const noexcept {
    if (x < kx_.front()) return -1;
    if (x >= kx_.back()) return x == kx_.back() ? bins_ - 1 : bins_;
    const auto it = std::upper_bound(kx_.begin(), kx_.end(), x);
    return static_cast<int>(it - kx_.begin()) - 1;
}

TransformEval RqSpline::eval(double x) const noexcept {
    const int k = locate(x);
    if (k < 0) {
        return {ky_.front() + kd_.front() * (x - kx_.front()), std::log(kd_.front())};
    }
    if (k >= bins_) {
        return {ky_.back() + kd_.back() * (x - kx_.back()), std::log(kd_.back())};
    }
    const double w = kx_[k + 1] - kx_[k];
    const double h = ky_[k + 1] - ky_[k];
    const double s = h / w;
    const double d0 = kd_[k];
    const double d1 = kd_[k + 1];
    const double xi = (x - kx_[k]) / w;
    const double t = xi * (1.0 - xi);
    const double num = s * xi * xi + d0 * t;
    const double den = s + (d0 + d1 - 2.0 * s) * t;
    const double n2 = d1 * xi * xi + 2.0 * s * t + d0 * (1.0 - xi) * (1.0 - xi);
    return {ky_[k] + h * num / den, 2.0 * std::log(s) + std::log(n2) - 2.0 * std::log(den)};
}

double RqSpline::derivative(double x) const noexcept { return std::exp(eval(x).log_deriv); }

double RqSpline::inverse(double z, double tol, int max_iter) const {
    if (!std::isfinite(z)) throw InvalidInput("spline inverse: non-finite target");
    // Linear tails make the map onto R; start from the spline interval and
    // extend by tail extrapolation until z is bracketed.
    double lo = kx_.front();
    double hi = kx_.back();
    double f_lo = ky_.front();
    double f_hi = ky_.back();
    if (z < f_lo) {
        lo = kx_.front() + (z - f_lo) / kd_.front();
        lo -= std::abs(lo) * 1e-12 + 1e-12;
        f_lo = eval(lo).value;
        if (std::abs(f_lo - z) <= tol) return lo;
        hi = kx_.front();
    } else if (z > f_hi) {
        hi = kx_.back() + (z - f_hi) / kd_.back();
        hi += std::abs(hi) * 1e-12 + 1e-12;
        f_hi = eval(hi).value;
        if (std::abs(f_hi - z) <= tol) return hi;
        lo = kx_.back();
    }
    if (!(eval(lo).value <= z && z <= eval(hi).value)) {
        throw InversionFailure("spline inverse: target not bracketed");
    }
    // Stop on a z-space residual of tol, tightened where the map is flat so
    // the x-space error (residual / slope) stays below tol as well.
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const TransformEval e = eval(mid);
        const double resid = std::abs(e.value - z);
        if (resid <= tol * std::min(1.0, std::exp(e.log_deriv))) return mid;
        if (e.value < z) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) {
            // bracket collapsed to a few ulps
            return std::abs(eval(lo).value - z) < std::abs(eval(hi).value - z) ? lo : hi;
        }
    }
    throw InversionFailure("spline inverse: iteration budget exhausted");
}

void RqSpline::backward(double x, double g_value, double g_log_deriv, std::span<double> grad_raw) const {
    const std::size_t k_bins = static_cast<std::size_t>(bins_);
    double* g_u = grad_raw.data();
    double* g_v = g_u + k_bins;
    double* g_s = g_v + k_bins;
    double& g_c = grad_raw[3 * k_bins + 1];

    const int k = locate(x);
    if (k < 0 || k >= bins_) {
        const bool left = k < 0;
        const std::size_t knot = left ? 0 : k_bins;
        const double d = kd_[knot];
        // value = y_knot + d (x - x_knot), y_0 = c0 + c - H/2, y_K = c0 + c + H/2
        g_c += g_value;
        const double g_total_h = left ? -0.5 * g_value : 0.5 * g_value;
        for (std::size_t j = 0; j < k_bins; ++j) g_v[j] += g_total_h * heights_[j];
        // d_i = exp(s_i): dvalue/ds = (x - x_knot) d, dlog_d/ds = 1
        g_s[knot] += g_value * (x - kx_[knot]) * d + g_log_deriv;
        return;
    }

    const std::size_t kb = static_cast<std::size_t>(k);
    const double w = kx_[kb + 1] - kx_[kb];
    const double h = heights_[kb];
    const double s = h / w;
    const double d0 = kd_[kb];
    const double d1 = kd_[kb + 1];
    const double xi = (x - kx_[kb]) / w;
    const double t = xi * (1.0 - xi);
    const double num = s * xi * xi + d0 * t;
    const double den = s + (d0 + d1 - 2.0 * s) * t;
    const double n2 = d1 * xi * xi + 2.0 * s * t + d0 * (1.0 - xi) * (1.0 - xi);

    // value = y_k + h num / den
    // log_deriv = 2 log s + log n2 - 2 log den
    double gy_k = g_value;
    double gh = g_value * num / den;
    const double g_num = g_value * h / den;
    const double g_den = -g_value * h * num / (den * den) - 2.0 * g_log_deriv / den;
    const double g_n2 = g_log_deriv / n2;
    double gs = 2.0 * g_log_deriv / s;
    double gd0 = 0.0, gd1 = 0.0, gxi = 0.0, gt = 0.0;

    gs += g_num * xi * xi;
    gd0 += g_num * t;
    gxi += g_num * 2.0 * s * xi;
    gt += g_num * d0;

    gs += g_den * (1.0 - 2.0 * t);
    gd0 += g_den * t;
    gd1 += g_den * t;
    gt += g_den * (d0 + d1 - 2.0 * s);

    gd1 += g_n2 * xi * xi;
    gd0 += g_n2 * (1.0 - xi) * (1.0 - xi);
    gxi += g_n2 * (2.0 * d1 * xi - 2.0 * d0 * (1.0 - xi));
    gs += g_n2 * 2.0 * t;
    gt += g_n2 * 2.0 * s;

    gxi += gt * (1.0 - 2.0 * xi);

    // s = h / w
    gh += gs / w;
    double gw = -gs * h / (w * w);
    // xi = (x - x_k) / w
    const double gx_k = -gxi / w;
    gw += -gxi * xi / w;

    // knot derivatives
    g_s[kb] += gd0 * d0;
    g_s[kb + 1] += gd1 * d1;

    // y_k = c0 + c - H/2 + sum_{j<k} h_j ; h = h_k ; h_j = base exp(v_j)
    g_c += gy_k;
    for (std::size_t j = 0; j < k_bins; ++j) {
        const double g_hj = -0.5 * gy_k + (j < kb ? gy_k : 0.0) + (j == kb ? gh : 0.0);
        g_v[j] += g_hj * heights_[j];
    }

    // x_k = lo + sum_{j<k} w_j ; w = w_k ; w_j = W (m + f softmax_j)
    const double scale = interval_.width() * (1.0 - static_cast<double>(k_bins) * kMinWidthFraction);
    double below = 0.0;
    for (std::size_t j = 0; j < kb; ++j) below += softmax_[j];
    const double dot = gx_k * below + gw * softmax_[kb];
    for (std::size_t j = 0; j < k_bins; ++j) {
        const double g_wj = (j < kb ? gx_k : 0.0) + (j == kb ? gw : 0.0);
        g_u[j] += scale * softmax_[j] * (g_wj - dot);
    }
}

}  // namespace rhognf
