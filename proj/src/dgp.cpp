#include "rhognf/dgp.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "rhognf/errors.hpp"

namespace rhognf {

namespace {

constexpr Table1Row kTable1[] = {
    {"SCM_{0.2,-0.71,-0.55}", {0.2, -0.6, 0.72}, -0.71, -0.55},
    {"SCM_{0.0,-0.55,-0.55}", {0.0, -0.4, 0.52}, -0.55, -0.55},
    {"SCM_{-0.2,-0.32,-0.55}", {-0.2, -0.2, 0.40}, -0.32, -0.55},
    {"SCM_{0.2,0.32,0.55}", {0.2, 0.2, 0.40}, 0.32, 0.55},
    {"SCM_{0.0,0.55,0.55}", {0.0, 0.4, 0.52}, 0.55, 0.55},
    {"SCM_{-0.2,0.71,0.55}", {-0.2, 0.6, 0.72}, 0.71, 0.55},
};

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter(std::string(what) + " must lie in [0, 1]");
}

bool bernoulli(Rng& rng, double p) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < p;
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

}  // namespace

void LinearScmParams::validate() const {
    if (!(delta > 0.0)) throw InvalidParameter("linear SCM: delta must be positive");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw InvalidParameter("linear SCM: non-finite coefficient");
    if (!(beta * beta < delta)) {
        throw InvalidParameter("linear SCM: noise covariance is not positive definite");
    }
}

double LinearScmParams::noise_correlation() const { return beta / std::sqrt(delta); }

double LinearScmParams::sigma_y() const { return std::sqrt(alpha * alpha + delta + 2.0 * alpha * beta); }

double LinearScmParams::observed_correlation() const { return (alpha + beta) / sigma_y(); }

std::span<const Table1Row> table1_rows() { return kTable1; }

Dataset sample_linear_scm(const LinearScmParams& params, std::size_t n, Rng& rng) {
    params.validate();
    std::normal_distribution<double> normal(0.0, 1.0);
    const double resid_sd = std::sqrt(params.delta - params.beta * params.beta);
    Dataset out(n);
    for (auto& o : out) {
        const double e_a = normal(rng);
        const double e_y = params.beta * e_a + resid_sd * normal(rng);
        o.a = e_a;
        o.y = params.alpha * o.a + e_y;
    }
    return out;
}

double linear_ace_oracle(const LinearScmParams& params, double rho_assumed) {
    params.validate();
    if (!(std::abs(rho_assumed) < 1.0)) throw DegenerateCopula("linear ACE oracle needs |rho| < 1");
    const double sigma_y = params.sigma_y();
    const double rho_obs = params.observed_correlation();
    return sigma_y * (rho_obs - rho_assumed * std::sqrt(1.0 - rho_obs * rho_obs) /
                                    std::sqrt(1.0 - rho_assumed * rho_assumed));
}

void BinaryDgpParams::validate() const {
    check_probability(p_u, "P(U=1)");
    for (double p : p_a_given_u) check_probability(p, "P(A=1|U)");
    for (const auto& row : p_y_given_au) {
        for (double p : row) check_probability(p, "P(Y=1|A,U)");
    }
}

void BinaryObsStats::validate() const {
    for (double p : {p1, p0, q1, q0}) check_probability(p, "observational probability");
    if (std::abs(p1 + p0 - 1.0) > 1e-12) throw InvalidParameter("P(A=1) + P(A=0) must equal 1");
}

BinaryDgpParams random_binary_dgp(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    BinaryDgpParams p;
    p.p_u = unif(rng);
    for (double& v : p.p_a_given_u) v = unif(rng);
    for (auto& row : p.p_y_given_au) {
        for (double& v : row) v = unif(rng);
    }
    return p;
}

Dataset sample_binary_dgp(const BinaryDgpParams& params, std::size_t n, Rng& rng) {
    params.validate();
    Dataset out(n);
    for (auto& o : out) {
        const int u = bernoulli(rng, params.p_u) ? 1 : 0;
        const int a = bernoulli(rng, params.p_a_given_u[u]) ? 1 : 0;
        const int y = bernoulli(rng, params.p_y_given_au[a][u]) ? 1 : 0;
        o.a = a;
        o.y = y;
    }
    return out;
}

double binary_true_ace(const BinaryDgpParams& params) {
    params.validate();
    const double pu[2] = {1.0 - params.p_u, params.p_u};
    double ace = 0.0;
    for (int u = 0; u < 2; ++u) ace += (params.p_y_given_au[1][u] - params.p_y_given_au[0][u]) * pu[u];
    return ace;
}

BinaryObsStats exact_obs_stats(const BinaryDgpParams& params) {
    params.validate();
    const double pu[2] = {1.0 - params.p_u, params.p_u};
    double p_a[2] = {0.0, 0.0};
    double p_ay[2] = {0.0, 0.0};  // P(A = a, Y = 1)
    for (int u = 0; u < 2; ++u) {
        const double pa1 = params.p_a_given_u[u];
        const double pa[2] = {1.0 - pa1, pa1};
        for (int a = 0; a < 2; ++a) {
            p_a[a] += pa[a] * pu[u];
            p_ay[a] += params.p_y_given_au[a][u] * pa[a] * pu[u];
        }
    }
    BinaryObsStats s;
    s.p1 = p_a[1];
    s.p0 = 1.0 - p_a[1];
    s.q1 = p_a[1] > 0.0 ? p_ay[1] / p_a[1] : 0.0;
    s.q0 = p_a[0] > 0.0 ? p_ay[0] / p_a[0] : 0.0;
    return s;
}

BinaryObsStats empirical_obs_stats(std::span<const int> a, std::span<const int> y) {
    if (a.size() != y.size() || a.empty()) throw InvalidInput("binary statistics need equal, non-empty columns");
    double n_a[2] = {0.0, 0.0};
    double n_y1[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] != 0 && a[i] != 1) || (y[i] != 0 && y[i] != 1)) {
            throw InvalidInput("binary statistics need 0/1 values");
        }
        n_a[a[i]] += 1.0;
        n_y1[a[i]] += y[i];
    }
    if (n_a[0] == 0.0 || n_a[1] == 0.0) throw InvalidInput("binary statistics need both treatment arms");
    const double n = static_cast<double>(a.size());
    BinaryObsStats s;
    s.p1 = n_a[1] / n;
    s.p0 = 1.0 - s.p1;
    s.q1 = n_y1[1] / n_a[1];
    s.q0 = n_y1[0] / n_a[0];
    return s;
}

BinaryObsStats empirical_obs_stats(std::span<const Observation> data) {
    std::vector<int> a(data.size()), y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& o = data[i];
        if ((o.a != 0.0 && o.a != 1.0) || (o.y != 0.0 && o.y != 1.0)) {
            throw InvalidInput("binary statistics need 0/1 values");
        }
        a[i] = static_cast<int>(o.a);
        y[i] = static_cast<int>(o.y);
    }
    return empirical_obs_stats(a, y);
}

AceBounds af_bounds(const BinaryObsStats& s) {
    s.validate();
    const double base = s.q1 * s.p1 - s.q0 * s.p0;
    return {base - s.p1, base + s.p0};
}

AceBounds sum_bounds(std::span<const AceBounds> per_dimension) {
    if (per_dimension.empty()) throw InvalidInput("bounds sum over an empty set of dimensions");
    AceBounds total;
    for (const auto& b : per_dimension) {
        total.lower += b.lower;
        total.upper += b.upper;
    }
    return total;
}

AceBounds categorical_af_bounds(std::span<const BinaryObsStats> per_dimension) {
    std::vector<AceBounds> bounds;
    bounds.reserve(per_dimension.size());
    for (const auto& s : per_dimension) bounds.push_back(af_bounds(s));
    return sum_bounds(bounds);
}

void CategoricalDgpParams::validate() const {
    if (p_y_given_au.empty()) throw InvalidParameter("categorical DGP needs at least one dimension");
    for (std::size_t d = 0; d < dimensions(); ++d) dimension(d).validate();
}

BinaryDgpParams CategoricalDgpParams::dimension(std::size_t d) const {
    BinaryDgpParams b;
    b.p_u = p_u;
    b.p_a_given_u = p_a_given_u;
    b.p_y_given_au = p_y_given_au.at(d);
    return b;
}

CategoricalDgpParams random_categorical_dgp(Rng& rng, std::size_t dimensions) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CategoricalDgpParams p;
    p.p_u = unif(rng);
    for (double& v : p.p_a_given_u) v = unif(rng);
    p.p_y_given_au.resize(dimensions);
    for (auto& table : p.p_y_given_au) {
        for (auto& row : table) {
            for (double& v : row) v = unif(rng);
        }
    }
    return p;
}

CategoricalSample sample_categorical_dgp(const CategoricalDgpParams& params, std::size_t n, Rng& rng) {
    params.validate();
    CategoricalSample out;
    out.observations.resize(n);
    out.dimension.assign(params.dimensions(), std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const int u = bernoulli(rng, params.p_u) ? 1 : 0;
        const int a = bernoulli(rng, params.p_a_given_u[u]) ? 1 : 0;
        int total = 0;
        for (std::size_t d = 0; d < params.dimensions(); ++d) {
            const int y = bernoulli(rng, params.p_y_given_au[d][a][u]) ? 1 : 0;
            out.dimension[d][i] = y;
            total += y;
        }
        out.observations[i] = {static_cast<double>(a), static_cast<double>(total)};
    }
    return out;
}

double categorical_true_ace(const CategoricalDgpParams& params) {
    params.validate();
    double total = 0.0;
    for (std::size_t d = 0; d < params.dimensions(); ++d) total += binary_true_ace(params.dimension(d));
    return total;
}

double true_ace(const DgpSpec& spec) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearScmParams>) {
                p.validate();
                return p.alpha;
            } else if constexpr (std::is_same_v<T, BinaryDgpParams>) {
                return binary_true_ace(p);
            } else {
                return categorical_true_ace(p);
            }
        },
        spec);
}

Dataset sample(const DgpSpec& spec, std::size_t n, Rng& rng) {
    return std::visit(
        [&](const auto& p) -> Dataset {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearScmParams>) {
                return sample_linear_scm(p, n, rng);
            } else if constexpr (std::is_same_v<T, BinaryDgpParams>) {
                return sample_binary_dgp(p, n, rng);
            } else {
                return sample_categorical_dgp(p, n, rng).observations;
            }
        },
        spec);
}

// ---------------------------------------------------------------------------

namespace {

std::string table_line(const std::array<std::array<double, 2>, 2>& t) {
    return fmt(t[0][0]) + " " + fmt(t[0][1]) + " " + fmt(t[1][0]) + " " + fmt(t[1][1]);
}

std::vector<double> numbers(const std::string& key, const std::string& value, std::size_t expected) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
            throw InvalidParameter("dgp config: '" + key + "' has a non-numeric value '" + tok + "'");
        }
        out.push_back(v);
    }
    if (out.size() != expected) {
        throw InvalidParameter("dgp config: '" + key + "' expects " + std::to_string(expected) + " values");
    }
    return out;
}

std::array<std::array<double, 2>, 2> table(const std::string& key, const std::string& value) {
    const auto v = numbers(key, value, 4);
    return {{{v[0], v[1]}, {v[2], v[3]}}};
}

}  // namespace

std::string format_dgp(const DgpSpec& spec) {
    std::ostringstream out;
    out << "# rhognf dgp v1\n";
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearScmParams>) {
                out << "kind = linear\n";
                out << "alpha = " << fmt(p.alpha) << "\nbeta = " << fmt(p.beta) << "\ndelta = " << fmt(p.delta)
                    << "\n";
            } else if constexpr (std::is_same_v<T, BinaryDgpParams>) {
                out << "kind = binary\n";
                out << "p_u = " << fmt(p.p_u) << "\n";
                out << "p_a_given_u = " << fmt(p.p_a_given_u[0]) << " " << fmt(p.p_a_given_u[1]) << "\n";
                out << "p_y_given_au = " << table_line(p.p_y_given_au) << "\n";
            } else {
                out << "kind = categorical\n";
                out << "p_u = " << fmt(p.p_u) << "\n";
                out << "p_a_given_u = " << fmt(p.p_a_given_u[0]) << " " << fmt(p.p_a_given_u[1]) << "\n";
                out << "dimensions = " << p.dimensions() << "\n";
                for (std::size_t d = 0; d < p.dimensions(); ++d) {
                    out << "p_y_given_au." << d << " = " << table_line(p.p_y_given_au[d]) << "\n";
                }
            }
        },
        spec);
    return out.str();
}

DgpSpec parse_dgp(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("dgp config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (kv.count(key)) throw InvalidParameter("dgp config: duplicate key '" + key + "'");
        kv[key] = trim(line.substr(eq + 1));
    }
    auto take = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw InvalidParameter("dgp config: missing key '" + key + "'");
        std::string v = it->second;
        kv.erase(it);
        return std::make_pair(key, v);
    };
    auto scalar = [&](const std::string& key) {
        const auto [k, v] = take(key);
        return numbers(k, v, 1)[0];
    };

    const std::string kind = take("kind").second;
    DgpSpec spec;
    if (kind == "linear") {
        LinearScmParams p;
        p.alpha = scalar("alpha");
        p.beta = scalar("beta");
        p.delta = scalar("delta");
        p.validate();
        spec = p;
    } else if (kind == "binary" || kind == "categorical") {
        const double p_u = scalar("p_u");
        const auto [ka, va] = take("p_a_given_u");
        const auto pa = numbers(ka, va, 2);
        if (kind == "binary") {
            BinaryDgpParams p;
            p.p_u = p_u;
            p.p_a_given_u = {pa[0], pa[1]};
            const auto [ky, vy] = take("p_y_given_au");
            p.p_y_given_au = table(ky, vy);
            p.validate();
            spec = p;
        } else {
            CategoricalDgpParams p;
            p.p_u = p_u;
            p.p_a_given_u = {pa[0], pa[1]};
            const double dims = scalar("dimensions");
            if (!(dims >= 1.0) || dims != std::floor(dims)) {
                throw InvalidParameter("dgp config: dimensions must be a positive integer");
            }
            for (std::size_t d = 0; d < static_cast<std::size_t>(dims); ++d) {
                const auto [kd, vd] = take("p_y_given_au." + std::to_string(d));
                p.p_y_given_au.push_back(table(kd, vd));
            }
            p.validate();
            spec = p;
        }
    } else {
        throw InvalidParameter("dgp config: unknown kind '" + kind + "'");
    }
    if (!kv.empty()) throw InvalidParameter("dgp config: unknown key '" + kv.begin()->first + "'");
    return spec;
}

}  // namespace rhognf
