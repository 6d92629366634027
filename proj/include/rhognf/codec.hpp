#pragma once

#include <span>
#include <vector>

#include "rhognf/copula.hpp"

namespace rhognf {

// Gaussian dequantization of a discrete variable: class k becomes k + sigma e.
struct DequantSpec {
    int n_classes = 2;
    double sigma = 0.1;

    void validate() const;
    double center(int k) const;
};

double encode(const DequantSpec& spec, int k, Rng& rng);
// Nearest center, clipped to the class range; midpoints round up.
int decode(const DequantSpec& spec, double x);

std::vector<double> encode_all(const DequantSpec& spec, std::span<const int> classes, Rng& rng);
// Decoded class frequencies, one entry per class.
std::vector<double> class_frequencies(const DequantSpec& spec, std::span<const double> values);

}  // namespace rhognf
