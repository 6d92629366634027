#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rhognf/copula.hpp"
#include "rhognf/errors.hpp"

using namespace rhognf;

namespace {

std::vector<NoisePair> draw(double rho, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    CopulaParam p(rho);
    std::vector<NoisePair> out(n);
    for (auto& v : out) v = sample_pair(p, rng);
    return out;
}

double normal_logpdf(double x) { return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x; }

// O(n^2) pair enumeration.
double kendall_brute(const std::vector<double>& x, const std::vector<double>& y) {
    double c = 0, d = 0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (x[i] - x[j]) * (y[i] - y[j]);
            if (s > 0) c += 1;
            if (s < 0) d += 1;
        }
    }
    return (c - d) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

TEST_CASE("sample_pair construction") {
    SUBCASE("rho = 1 gives identical coordinates") {
        for (const auto& p : draw(1.0, 1000, 3)) CHECK(p.z_y == p.z_a);
    }
    SUBCASE("rho = -1 gives mirrored coordinates") {
        for (const auto& p : draw(-1.0, 1000, 3)) CHECK(p.z_y == -p.z_a);
    }
    SUBCASE("sample correlation and marginals") {
        for (double rho : {-0.99, -0.5, 0.0, 0.5, 0.6, 0.99}) {
            const auto pairs = draw(rho, 100000, 11);
            std::vector<double> a, y;
            for (const auto& p : pairs) {
                a.push_back(p.z_a);
                y.push_back(p.z_y);
            }
            CHECK(std::abs(pearson_r(a, y) - rho) < 0.01);
            for (const auto* v : {&a, &y}) {
                double m = 0, s = 0;
                for (double x : *v) m += x;
                m /= v->size();
                for (double x : *v) s += (x - m) * (x - m);
                s /= v->size();
                CHECK(std::abs(m) < 0.02);
                CHECK(std::abs(s - 1.0) < 0.03);
            }
        }
    }
    SUBCASE("seeded streams are reproducible") {
        const auto a = draw(0.3, 50, 99);
        const auto b = draw(0.3, 50, 99);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].z_a == b[i].z_a);
            CHECK(a[i].z_y == b[i].z_y);
        }
    }
    CHECK_THROWS_AS(CopulaParam(1.0001), InvalidInput);
}

TEST_CASE("log_density") {
    CHECK(log_density(CopulaParam(0.0), {0.0, 0.0}) == doctest::Approx(-std::log(2.0 * std::numbers::pi)));
    CHECK(log_density(CopulaParam(0.0), {0.0, 0.0}) == doctest::Approx(-1.837877).epsilon(1e-6));

    for (double za : {-2.0, -0.3, 0.7, 1.9}) {
        for (double zy : {-1.1, 0.0, 2.5}) {
            CHECK(log_density(CopulaParam(0.0), {za, zy}) ==
                  doctest::Approx(normal_logpdf(za) + normal_logpdf(zy)).epsilon(1e-13));
            // conditional factorization: z_y | z_a ~ N(rho z_a, 1 - rho^2)
            const double rho = 0.5;
            const double sd = std::sqrt(1 - rho * rho);
            const double factored = normal_logpdf(za) + normal_logpdf((zy - rho * za) / sd) - std::log(sd);
            CHECK(log_density(CopulaParam(rho), {za, zy}) == doctest::Approx(factored).epsilon(1e-12));
        }
    }
    CHECK(log_density(CopulaParam(0.5), {1.0, 1.0}) == doctest::Approx(-2.3607026968501215).epsilon(1e-12));

    CHECK_THROWS_AS(log_density(CopulaParam(1.0), {0.0, 0.0}), DegenerateCopula);
    CHECK_THROWS_AS(log_density(CopulaParam(-1.0), {0.0, 0.0}), DegenerateCopula);
}

TEST_CASE("log_density integrates to one") {
    for (double rho : {0.0, 0.5}) {
        // composite Simpson on [-6, 6]^2
        const int n = 600;
        const double h = 12.0 / n;
        auto weight = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
        double total = 0.0;
        CopulaParam p(rho);
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                total += weight(i) * weight(j) * std::exp(log_density(p, {-6.0 + i * h, -6.0 + j * h}));
            }
        }
        total *= h * h / 9.0;
        CHECK(std::abs(total - 1.0) < 1e-4);
    }
}

TEST_CASE("spearman_rho") {
    const std::vector<double> inc{0.1, 0.5, 2.0, 3.5, 10.0};
    std::vector<double> dec(inc.rbegin(), inc.rend());
    CHECK(spearman_rho(inc, inc) == doctest::Approx(1.0));
    CHECK(spearman_rho(inc, dec) == doctest::Approx(-1.0));
    CHECK(spearman_rho(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{1, 3, 2, 5, 4}) ==
          doctest::Approx(0.8));

    SUBCASE("average ranks for ties") {
        const auto r = average_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0});
        CHECK(r == std::vector<double>{3.5, 1.0, 3.5, 2.0});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(spearman_rho(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InvalidInput);
        CHECK_THROWS_AS(spearman_rho(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InvalidInput);
        CHECK_THROWS_AS(spearman_rho(std::vector<double>{1}, std::vector<double>{1}), InvalidInput);
    }
}

TEST_CASE("kendall_tau") {
    const std::vector<double> inc{0.1, 0.5, 2.0, 3.5, 10.0};
    std::vector<double> dec(inc.rbegin(), inc.rend());
    CHECK(kendall_tau(inc, inc) == doctest::Approx(1.0));
    CHECK(kendall_tau(inc, dec) == doctest::Approx(-1.0));
    CHECK(kendall_tau(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(kendall_tau(std::vector<double>{1, 2}, std::vector<double>{2, 2}), InvalidInput);

    SUBCASE("merge-sort count agrees with pair enumeration, with and without ties") {
        Rng rng(5);
        std::uniform_int_distribution<int> small(0, 6);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 2 + trial * 7;
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = trial % 2 ? small(rng) : normal(rng);
                y[i] = trial % 3 ? small(rng) : normal(rng) + x[i];
            }
            if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
            if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) continue;
            CHECK(kendall_tau(x, y) == doctest::Approx(kendall_brute(x, y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("rank statistics are invariant under increasing transforms") {
    Rng rng(17);
    std::normal_distribution<double> normal;
    std::vector<double> x(500), y(500);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = normal(rng);
        y[i] = 0.4 * x[i] + normal(rng);
    }
    std::vector<double> fx(x.size()), gy(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        fx[i] = std::exp(x[i]);
        gy[i] = y[i] * y[i] * y[i] + 2.0 * y[i];
    }
    CHECK(spearman_rho(fx, gy) == spearman_rho(x, y));
    CHECK(kendall_tau(fx, gy) == kendall_tau(x, y));
}

TEST_CASE("rank-correlation conversions") {
    CHECK(spearman_from_rho(0.0) == 0.0);
    CHECK(kendall_from_rho(0.0) == 0.0);
    CHECK(spearman_from_rho(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kendall_from_rho(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spearman_from_rho(0.5) == doctest::Approx(0.4825837395309974).epsilon(1e-13));

    for (int i = 0; i <= 200; ++i) {
        const double rho = -1.0 + i * 0.01;
        CHECK(std::abs(rho_from_spearman(spearman_from_rho(rho)) - rho) < 1e-12);
        CHECK(std::abs(rho_from_kendall(kendall_from_rho(rho)) - rho) < 1e-12);
    }
    CHECK_THROWS_AS(spearman_from_rho(1.5), InvalidInput);
    CHECK_THROWS_AS(rho_from_kendall(-1.01), InvalidInput);

    SUBCASE("empirical spearman on Gaussian draws") {
        const auto pairs = draw(0.6, 100000, 23);
        std::vector<double> a, y;
        for (const auto& p : pairs) {
            a.push_back(p.z_a);
            y.push_back(p.z_y);
        }
        CHECK(std::abs(spearman_rho(a, y) - spearman_from_rho(0.6)) < 0.01);
        CHECK(std::abs(kendall_tau(a, y) - kendall_from_rho(0.6)) < 0.01);
    }
}
