#include "rhognf/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rhognf/errors.hpp"

namespace rhognf {

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw InvalidInput("rank correlation: length mismatch");
    }
    if (xs.size() < 2) {
        throw InvalidInput("rank correlation: need at least two observations");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw InvalidInput("rank correlation: non-finite value");
        }
    }
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(xs) || constant(ys)) {
        throw InvalidInput("rank correlation: constant sequence");
    }
}

void check_unit(double v, const char* what) {
    if (!(v >= -1.0 && v <= 1.0)) {
        throw InvalidInput(std::string(what) + ": argument outside [-1, 1]");
    }
}

// Number of tied pairs among runs of equal values in an already-sorted range.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal) {
    std::uint64_t total = 0;
    std::uint64_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (equal(i - 1, i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

// Merge sort on v, returning the number of inversions (strictly greater
// element preceding a smaller one).
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return inv;
}

}  // namespace

CopulaParam::CopulaParam(double rho) : rho_(rho) {
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw InvalidInput("copula correlation must lie in [-1, 1]");
    }
}

bool CopulaParam::degenerate() const noexcept { return std::abs(rho_) >= 1.0; }

NoisePair sample_pair(const CopulaParam& param, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z_a = normal(rng);
    const double e = normal(rng);
    const double rho = param.rho();
    return {z_a, rho * z_a + std::sqrt(1.0 - rho * rho) * e};
}

double log_density(const CopulaParam& param, const NoisePair& pair) {
    if (param.degenerate()) {
        throw DegenerateCopula("log density undefined for |rho| >= 1");
    }
    const double rho = param.rho();
    const double one_minus = 1.0 - rho * rho;
    const double quad = pair.z_a * pair.z_a - 2.0 * rho * pair.z_a * pair.z_y + pair.z_y * pair.z_y;
    return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_minus) - quad / (2.0 * one_minus);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 hold 1-based ranks i+1..j
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson_r(rx, ry);
}

// Knight's O(n log n) scheme: sort by (x, y), count tied groups, then count
// y-inversions with a merge sort.
double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return xs[l] < xs[r] || (xs[l] == xs[r] && ys[l] < ys[r]);
    });
    const std::uint64_t tied_x =
        tied_pairs(n, [&](std::size_t i, std::size_t j) { return xs[order[i]] == xs[order[j]]; });
    const std::uint64_t tied_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
        return xs[order[i]] == xs[order[j]] && ys[order[i]] == ys[order[j]];
    });
    std::vector<double> y_sorted(n);
    for (std::size_t i = 0; i < n; ++i) y_sorted[i] = ys[order[i]];
    std::vector<double> buf(n);
    const std::uint64_t discordant = count_inversions(y_sorted, buf, 0, n);
    const std::uint64_t tied_y =
        tied_pairs(n, [&](std::size_t i, std::size_t j) { return y_sorted[i] == y_sorted[j]; });

    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t untied = total - tied_x - tied_y + tied_xy;
    const double concordant = static_cast<double>(untied) - static_cast<double>(discordant);
    return (concordant - static_cast<double>(discordant)) / static_cast<double>(total);
}

RankStats rank_stats(std::span<const double> xs, std::span<const double> ys) {
    return {spearman_rho(xs, ys), kendall_tau(xs, ys), pearson_r(xs, ys)};
}

double spearman_from_rho(double rho) {
    check_unit(rho, "spearman_from_rho");
    return 6.0 / std::numbers::pi * std::asin(rho / 2.0);
}

double kendall_from_rho(double rho) {
    check_unit(rho, "kendall_from_rho");
    return 2.0 / std::numbers::pi * std::asin(rho);
}

double rho_from_spearman(double rho_s) {
    check_unit(rho_s, "rho_from_spearman");
    return 2.0 * std::sin(std::numbers::pi * rho_s / 6.0);
}

double rho_from_kendall(double tau) {
    check_unit(tau, "rho_from_kendall");
    return std::sin(std::numbers::pi * tau / 2.0);
}

}  // namespace rhognf
