#include "rhognf/codec.hpp"

#include <cmath>
#include <string>

#include "rhognf/errors.hpp"

namespace rhognf {

void DequantSpec::validate() const {
    if (n_classes < 2) throw InvalidParameter("dequantization needs at least two classes");
    // Unit spacing: keep three sigmas inside half a gap.
    if (!(sigma > 0.0 && sigma < 0.5 / 3.0)) throw InvalidParameter("dequantization sigma must lie in (0, 1/6)");
}

double DequantSpec::center(int k) const {
    if (k < 0 || k >= n_classes) {
        throw InvalidInput("class " + std::to_string(k) + " outside 0.." + std::to_string(n_classes - 1));
    }
    return static_cast<double>(k);
}

double encode(const DequantSpec& spec, int k, Rng& rng) {
    spec.validate();
    const double mu = spec.center(k);
    std::normal_distribution<double> normal(0.0, 1.0);
    return mu + spec.sigma * normal(rng);
}

int decode(const DequantSpec& spec, double x) {
    if (std::isnan(x)) throw InvalidInput("cannot decode NaN");
    const double top = spec.n_classes - 1;
    const double k = std::floor(x + 0.5);
    if (k <= 0.0) return 0;
    if (k >= top) return static_cast<int>(top);
    return static_cast<int>(k);
}

std::vector<double> encode_all(const DequantSpec& spec, std::span<const int> classes, Rng& rng) {
    std::vector<double> out;
    out.reserve(classes.size());
    for (int k : classes) out.push_back(encode(spec, k, rng));
    return out;
}

std::vector<double> class_frequencies(const DequantSpec& spec, std::span<const double> values) {
    if (values.empty()) throw InvalidInput("class frequencies of an empty sample");
    std::vector<double> freq(static_cast<std::size_t>(spec.n_classes), 0.0);
    for (double v : values) freq[static_cast<std::size_t>(decode(spec, v))] += 1.0;
    for (double& f : freq) f /= static_cast<double>(values.size());
    return freq;
}

}  // namespace rhognf
