#pragma once

#include <random>
#include <span>
#include <vector>

namespace rhognf {

using Rng = std::mt19937_64;

// Correlation of the bivariate standard-normal base. Construction validates
// |rho| <= 1; density evaluation additionally needs |rho| < 1.
class CopulaParam {
public:
    explicit CopulaParam(double rho);
    double rho() const noexcept { return rho_; }
    bool degenerate() const noexcept;

private:
    double rho_;
};

struct NoisePair {
    double z_a = 0.0;
    double z_y = 0.0;
};

struct RankStats {
    double spearman = 0.0;
    double kendall = 0.0;
    double pearson = 0.0;
};

// z_y = rho * z_a + sqrt(1 - rho^2) * e, with z_a and e independent N(0, 1).
NoisePair sample_pair(const CopulaParam& param, Rng& rng);

// Log of the bivariate normal density with unit variances and correlation rho.
// Throws DegenerateCopula when |rho| >= 1.
double log_density(const CopulaParam& param, const NoisePair& pair);

double pearson_r(std::span<const double> xs, std::span<const double> ys);
double spearman_rho(std::span<const double> xs, std::span<const double> ys);
double kendall_tau(std::span<const double> xs, std::span<const double> ys);
RankStats rank_stats(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks, ties share the average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Rank-correlation conversions for the bivariate Gaussian copula.
double spearman_from_rho(double rho);
double kendall_from_rho(double rho);
double rho_from_spearman(double rho_s);
double rho_from_kendall(double tau);

}  // namespace rhognf
