#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rhognf/copula.hpp"
#include "rhognf/observation.hpp"

namespace rhognf {

// A := e_A, Y := alpha A + e_Y, (e_A, e_Y) ~ N(0, [[1, beta], [beta, delta]]).
struct LinearScmParams {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 1.0;

    void validate() const;
    double noise_correlation() const;  // beta / sqrt(delta)
    double sigma_y() const;            // sqrt(alpha^2 + delta + 2 alpha beta)
    double observed_correlation() const;  // (alpha + beta) / sigma_y
};

struct Table1Row {
    const char* name;
    LinearScmParams params;
    double printed_rho;      // non-causal column as printed
    double printed_rho_obs;  // total-association column as printed
};

// The six observationally paired linear SCMs of the continuous benchmark.
std::span<const Table1Row> table1_rows();

Dataset sample_linear_scm(const LinearScmParams& params, std::size_t n, Rng& rng);

// Closed-form ACE of the Gaussian-copula model fitted to the linear SCM's
// observational law at an assumed copula correlation.
double linear_ace_oracle(const LinearScmParams& params, double rho_assumed);

// Bernoulli tables of U -> A, (A, U) -> Y. Indexing: p_a_given_u[u],
// p_y_given_au[a][u].
struct BinaryDgpParams {
    double p_u = 0.5;
    std::array<double, 2> p_a_given_u{0.5, 0.5};
    std::array<std::array<double, 2>, 2> p_y_given_au{{{0.5, 0.5}, {0.5, 0.5}}};

    void validate() const;
};

struct BinaryObsStats {
    double p1 = 0.5;  // P(A = 1)
    double p0 = 0.5;  // P(A = 0)
    double q1 = 0.5;  // P(Y = 1 | A = 1)
    double q0 = 0.5;  // P(Y = 1 | A = 0)

    void validate() const;
};

struct AceBounds {
    double lower = 0.0;
    double upper = 0.0;
    double width() const noexcept { return upper - lower; }
};

// Every Bernoulli parameter uniform on [0, 1].
BinaryDgpParams random_binary_dgp(Rng& rng);

// Returns (a, y) in {0, 1}; the confounder is drawn and discarded.
Dataset sample_binary_dgp(const BinaryDgpParams& params, std::size_t n, Rng& rng);

// Backdoor adjustment over U.
double binary_true_ace(const BinaryDgpParams& params);

BinaryObsStats exact_obs_stats(const BinaryDgpParams& params);
// Plug-in estimates from 0/1 data. Throws InvalidInput for non-binary values
// or when one treatment arm is empty.
BinaryObsStats empirical_obs_stats(std::span<const Observation> data);
BinaryObsStats empirical_obs_stats(std::span<const int> a, std::span<const int> y);

AceBounds af_bounds(const BinaryObsStats& stats);
AceBounds sum_bounds(std::span<const AceBounds> per_dimension);
AceBounds categorical_af_bounds(std::span<const BinaryObsStats> per_dimension);

// Several binary outcome dimensions sharing one confounder U and one
// treatment A; the observed outcome is the number of dimensions equal to 1.
struct CategoricalDgpParams {
    double p_u = 0.5;
    std::array<double, 2> p_a_given_u{0.5, 0.5};
    std::vector<std::array<std::array<double, 2>, 2>> p_y_given_au;  // one table per dimension

    void validate() const;
    std::size_t dimensions() const noexcept { return p_y_given_au.size(); }
    BinaryDgpParams dimension(std::size_t d) const;
};

struct CategoricalSample {
    Dataset observations;                     // (a, sum of dimensions)
    std::vector<std::vector<int>> dimension;  // dimension[d][i]
};

CategoricalDgpParams random_categorical_dgp(Rng& rng, std::size_t dimensions = 7);
CategoricalSample sample_categorical_dgp(const CategoricalDgpParams& params, std::size_t n, Rng& rng);
double categorical_true_ace(const CategoricalDgpParams& params);

using DgpSpec = std::variant<LinearScmParams, BinaryDgpParams, CategoricalDgpParams>;

double true_ace(const DgpSpec& spec);
// Observational pairs. Categorical specs return the summed outcome.
Dataset sample(const DgpSpec& spec, std::size_t n, Rng& rng);

// Plain-text "key = value" block; see docs/formats.md.
std::string format_dgp(const DgpSpec& spec);
DgpSpec parse_dgp(const std::string& text);

}  // namespace rhognf
