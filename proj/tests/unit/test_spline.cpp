#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "rhognf/errors.hpp"
#include "rhognf/spline.hpp"

using namespace rhognf;
using rhognf::testing::close_rel;

namespace {

std::vector<double> random_raw(int bins, std::uint64_t seed, double scale) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> raw(RqSpline::param_count(bins));
    for (double& v : raw) v = normal(rng);
    return raw;
}

}  // namespace

TEST_CASE("zero raw parameters give the identity map") {
    const std::vector<double> raw(RqSpline::param_count(8), 0.0);
    RqSpline s(8, {-4.0, 5.0}, raw);
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        const auto e = s.eval(x);
        CHECK(std::abs(e.value - x) < 1e-12);
        CHECK(std::abs(e.log_deriv) < 1e-12);
    }
}

TEST_CASE("knots are consistent with the parameterization") {
    const auto raw = random_raw(5, 4, 1.0);
    RqSpline s(5, {-1.0, 2.0}, raw);
    CHECK(s.knots_x().front() == -1.0);
    CHECK(s.knots_x().back() == 2.0);
    for (std::size_t i = 0; i + 1 < s.knots_x().size(); ++i) {
        CHECK(s.knots_x()[i + 1] > s.knots_x()[i]);
        CHECK(s.knots_y()[i + 1] > s.knots_y()[i]);
        // the map interpolates its knots
        CHECK(s.eval(s.knots_x()[i]).value == doctest::Approx(s.knots_y()[i]).epsilon(1e-12));
        CHECK(s.derivative(s.knots_x()[i]) == doctest::Approx(s.knot_derivs()[i]).epsilon(1e-10));
    }
}

TEST_CASE("random splines are strictly increasing with matching derivatives") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int bins = 3 + static_cast<int>(seed % 6);
        const auto raw = random_raw(bins, seed, 0.8);
        RqSpline s(bins, {-2.0, 3.0}, raw);
        double prev = s.eval(-6.0).value;
        for (int i = 1; i <= 10000; ++i) {
            const double x = -6.0 + 14.0 * i / 10000.0;
            const auto e = s.eval(x);
            CHECK(e.value > prev);
            CHECK(std::isfinite(e.log_deriv));
            prev = e.value;
        }
        for (double x : {-5.0, -1.7, 0.3, 1.1, 2.9, 4.4}) {
            const double h = 1e-5;
            const double fd = (s.eval(x + h).value - s.eval(x - h).value) / (2 * h);
            CHECK(close_rel(s.derivative(x), fd, 1e-4));
        }
    }
}

TEST_CASE("inverse") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto raw = random_raw(7, 100 + seed, 0.7);
        RqSpline s(7, {-3.0, 3.0}, raw);
        Rng rng(seed);
        std::uniform_real_distribution<double> unif(-8.0, 8.0);
        for (int i = 0; i < 100; ++i) {
            const double x = unif(rng);
            const double z = s.eval(x).value;
            const double back = s.inverse(z);
            CHECK(std::abs(back - x) < 1e-8);
            CHECK(std::abs(s.eval(back).value - z) <= 1e-9);
        }
    }
    SUBCASE("bisection agrees with a dense grid scan") {
        const auto raw = random_raw(8, 77, 0.6);
        RqSpline s(8, {-3.0, 3.0}, raw);
        const double z = 0.5;
        const int n = 1000000;
        const double lo = -6.0, hi = 6.0, step = (hi - lo) / n;
        double best_x = lo, best = 1e300;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + i * step;
            const double r = std::abs(s.eval(x).value - z);
            if (r < best) {
                best = r;
                best_x = x;
            }
        }
        CHECK(std::abs(s.inverse(z) - best_x) <= step);
    }
    SUBCASE("tails") {
        const std::vector<double> raw(RqSpline::param_count(4), 0.0);
        RqSpline s(4, {-1.0, 1.0}, raw);
        CHECK(s.inverse(-1e6) == doctest::Approx(-1e6));
        CHECK(s.inverse(2.5e3) == doctest::Approx(2.5e3));
    }
    CHECK_THROWS_AS(RqSpline(3, {-1.0, 1.0}, random_raw(3, 1, 1.0)).inverse(NAN), InvalidInput);
}

TEST_CASE("backward matches finite differences on value and log-derivative") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int bins = 2 + static_cast<int>(seed % 7);
        auto raw = random_raw(bins, 500 + seed, 0.5);
        const Interval iv{-2.0, 2.5};
        Rng rng(seed);
        std::uniform_real_distribution<double> unif(-4.0, 4.5);
        for (int trial = 0; trial < 6; ++trial) {
            const double x = unif(rng);
            const double g_value = 0.7, g_ld = -1.3;
            RqSpline s(bins, iv, raw);
            std::vector<double> grad(raw.size(), 0.0);
            s.backward(x, g_value, g_ld, grad);
            for (std::size_t j = 0; j < raw.size(); ++j) {
                const double h = 1e-5;
                auto f = [&](double delta) {
                    auto r = raw;
                    r[j] += delta;
                    const auto e = RqSpline(bins, iv, r).eval(x);
                    return g_value * e.value + g_ld * e.log_deriv;
                };
                const double fd = (f(h) - f(-h)) / (2 * h);
                CHECK_MESSAGE(close_rel(grad[j], fd, 1e-4), "seed ", seed, " param ", j, " x ", x);
            }
        }
    }
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(RqSpline(0, {-1.0, 1.0}, std::vector<double>(2)), InvalidParameter);
    CHECK_THROWS_AS(RqSpline(2, {1.0, 1.0}, std::vector<double>(8)), InvalidParameter);
    CHECK_THROWS_AS(RqSpline(2, {-1.0, 1.0}, std::vector<double>(7)), InvalidParameter);
}
