#include "rhognf/flow.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "rhognf/errors.hpp"

namespace rhognf {

namespace {

constexpr const char* kParamsMagic = "rhognf-flow-params";
constexpr int kParamsVersion = 1;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite input");
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(Activation act) {
    switch (act) {
        case Activation::Tanh:
            return "tanh";
        case Activation::Sigmoid:
            return "sigmoid";
    }
    return "tanh";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw InvalidParameter("unknown activation '" + name + "'");
}

std::size_t FlowHyper::treatment_param_count() const { return RqSpline::param_count(bins_a); }

std::size_t FlowHyper::outcome_param_count() const { return Conditioner::param_count(*this); }

void FlowHyper::validate() const {
    if (bins_a < 1 || bins_y < 1) throw InvalidParameter("spline bin counts must be positive");
    for (int w : hidden) {
        if (w < 1) throw InvalidParameter("hidden widths must be positive");
    }
    if (!(range_a.hi > range_a.lo) || !(range_y.hi > range_y.lo)) {
        throw InvalidParameter("transform input ranges must be non-empty");
    }
    if (!(cond_scale > 0.0) || !std::isfinite(cond_center)) {
        throw InvalidParameter("conditioner input scaling must be finite and positive");
    }
}

bool operator==(const FlowHyper& lhs, const FlowHyper& rhs) {
    return lhs.bins_a == rhs.bins_a && lhs.bins_y == rhs.bins_y && lhs.hidden == rhs.hidden &&
           lhs.activation == rhs.activation && lhs.range_a.lo == rhs.range_a.lo &&
           lhs.range_a.hi == rhs.range_a.hi && lhs.range_y.lo == rhs.range_y.lo &&
           lhs.range_y.hi == rhs.range_y.hi && lhs.cond_center == rhs.cond_center &&
           lhs.cond_scale == rhs.cond_scale;
}

FlowParams FlowParams::identity(const FlowHyper& hyper, std::uint64_t seed) {
    hyper.validate();
    FlowParams p;
    p.hyper = hyper;
    p.theta.assign(hyper.treatment_param_count() + hyper.outcome_param_count(), 0.0);

    Rng rng(seed);
    auto out = p.outcome();
    std::size_t offset = 0;
    std::size_t fan_in = 1;
    for (int width : hyper.hidden) {
        const auto w = static_cast<std::size_t>(width);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> unif(-bound, bound);
        for (std::size_t i = 0; i < w * fan_in + w; ++i) out[offset + i] = unif(rng);
        offset += w * fan_in + w;
        fan_in = w;
    }
    // output layer stays zero
    return p;
}

std::span<const double> FlowParams::treatment() const {
    return std::span<const double>(theta).first(hyper.treatment_param_count());
}
std::span<double> FlowParams::treatment() { return std::span<double>(theta).first(hyper.treatment_param_count()); }
std::span<const double> FlowParams::outcome() const {
    return std::span<const double>(theta).subspan(hyper.treatment_param_count());
}
std::span<double> FlowParams::outcome() { return std::span<double>(theta).subspan(hyper.treatment_param_count()); }

// ---------------------------------------------------------------------------

Conditioner::Conditioner(const FlowHyper& hyper)
    : activation_(hyper.activation), center_(hyper.cond_center), scale_(hyper.cond_scale) {
    widths_.push_back(1);
    for (int w : hyper.hidden) widths_.push_back(static_cast<std::size_t>(w));
    widths_.push_back(RqSpline::param_count(hyper.bins_y));
    acts_.resize(widths_.size());
    grads_.resize(widths_.size());
    for (std::size_t l = 0; l < widths_.size(); ++l) {
        acts_[l].resize(widths_[l]);
        grads_[l].resize(widths_[l]);
    }
}

std::size_t Conditioner::param_count(const FlowHyper& hyper) {
    std::size_t total = 0;
    std::size_t fan_in = 1;
    for (int w : hyper.hidden) {
        total += static_cast<std::size_t>(w) * fan_in + static_cast<std::size_t>(w);
        fan_in = static_cast<std::size_t>(w);
    }
    const std::size_t out = RqSpline::param_count(hyper.bins_y);
    return total + out * fan_in + out;
}

double Conditioner::activate(double x) const noexcept {
    return activation_ == Activation::Tanh ? std::tanh(x) : 1.0 / (1.0 + std::exp(-x));
}

double Conditioner::activate_grad(double out) const noexcept {
    return activation_ == Activation::Tanh ? 1.0 - out * out : out * (1.0 - out);
}

void Conditioner::forward(std::span<const double> weights, double a_cond, std::span<double> out) {
    acts_[0][0] = (a_cond - center_) / scale_;
    const double* w = weights.data();
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t n_in = widths_[l];
        const std::size_t n_out = widths_[l + 1];
        const double* bias = w + n_out * n_in;
        const auto& in = acts_[l];
        auto& dst = acts_[l + 1];
        const bool hidden = l + 1 < layers;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double* row = w + o * n_in;
            double acc = bias[o];
            for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
            dst[o] = hidden ? activate(acc) : acc;
        }
        w = bias + n_out;
    }
    std::copy(acts_.back().begin(), acts_.back().end(), out.begin());
}

void Conditioner::backward(std::span<const double> weights, std::span<const double> g_out,
                           std::span<double> g_weights) {
    const std::size_t layers = widths_.size() - 1;
    // offsets of each layer's weight block
    std::size_t offset = weights.size();
    std::copy(g_out.begin(), g_out.end(), grads_.back().begin());
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t n_in = widths_[l];
        const std::size_t n_out = widths_[l + 1];
        offset -= n_out * n_in + n_out;
        const double* w = weights.data() + offset;
        double* gw = g_weights.data() + offset;
        double* gb = gw + n_out * n_in;
        auto& g = grads_[l + 1];
        if (l + 1 < layers) {
            for (std::size_t o = 0; o < n_out; ++o) g[o] *= activate_grad(acts_[l + 1][o]);
        }
        const auto& in = acts_[l];
        for (std::size_t o = 0; o < n_out; ++o) {
            const double go = g[o];
            if (go == 0.0) continue;
            double* grow = gw + o * n_in;
            for (std::size_t i = 0; i < n_in; ++i) grow[i] += go * in[i];
            gb[o] += go;
        }
        if (l > 0) {
            auto& g_in = grads_[l];
            std::fill(g_in.begin(), g_in.end(), 0.0);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double go = g[o];
                if (go == 0.0) continue;
                const double* row = w + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i) g_in[i] += row[i] * go;
            }
        }
    }
}

// ---------------------------------------------------------------------------

FlowEvaluator::FlowEvaluator(const FlowParams& params)
    : params_(&params), conditioner_(params.hyper) {
    params.hyper.validate();
    if (params.theta.size() != params.hyper.treatment_param_count() + params.hyper.outcome_param_count()) {
        throw InvalidParameter("flow parameter vector does not match its architecture");
    }
    raw_y_.resize(conditioner_.output_size());
    g_raw_y_.resize(conditioner_.output_size());
    refresh();
}

void FlowEvaluator::refresh() {
    spline_a_.assign(params_->hyper.bins_a, params_->hyper.range_a, params_->treatment());
}

const RqSpline& FlowEvaluator::outcome_spline(double a_cond) {
    conditioner_.forward(params_->outcome(), a_cond, raw_y_);
    spline_y_.assign(params_->hyper.bins_y, params_->hyper.range_y, raw_y_);
    return spline_y_;
}

double FlowEvaluator::nll(std::span<const Observation> batch, const CopulaParam& rho, std::span<double> grad) {
    if (batch.empty()) throw InvalidInput("negative log-likelihood of an empty batch");
    if (rho.degenerate()) throw DegenerateCopula("likelihood undefined for |rho| >= 1");
    refresh();
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != params_->theta.size()) {
        throw InvalidInput("gradient buffer does not match parameter count");
    }
    const double r = rho.rho();
    const double one_minus = 1.0 - r * r;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const std::size_t n_a = params_->hyper.treatment_param_count();
    auto grad_a = want_grad ? grad.first(n_a) : std::span<double>{};
    auto grad_y = want_grad ? grad.subspan(n_a) : std::span<double>{};

    double total = 0.0;
    for (const auto& obs : batch) {
        const TransformEval ea = spline_a_.eval(obs.a);
        const RqSpline& sy = outcome_spline(obs.a);
        const TransformEval ey = sy.eval(obs.y);
        const double ll = log_density(rho, {ea.value, ey.value}) + ea.log_deriv + ey.log_deriv;
        total -= ll;
        if (want_grad) {
            const double g_za = (ea.value - r * ey.value) / one_minus * inv_n;
            const double g_zy = (ey.value - r * ea.value) / one_minus * inv_n;
            spline_a_.backward(obs.a, g_za, -inv_n, grad_a);
            std::fill(g_raw_y_.begin(), g_raw_y_.end(), 0.0);
            sy.backward(obs.y, g_zy, -inv_n, g_raw_y_);
            conditioner_.backward(params_->outcome(), g_raw_y_, grad_y);
        }
    }
    return total * inv_n;
}

// ---------------------------------------------------------------------------

TransformEval forward_a(const FlowParams& params, double a) {
    require_finite(a, "forward_a");
    return RqSpline(params.hyper.bins_a, params.hyper.range_a, params.treatment()).eval(a);
}

TransformEval forward_y(const FlowParams& params, double y, double a_cond) {
    require_finite(y, "forward_y");
    require_finite(a_cond, "forward_y");
    FlowEvaluator ev(params);
    return ev.outcome_spline(a_cond).eval(y);
}

double inverse_a(const FlowParams& params, double z) {
    require_finite(z, "inverse_a");
    return RqSpline(params.hyper.bins_a, params.hyper.range_a, params.treatment()).inverse(z);
}

double inverse_y(const FlowParams& params, double z, double a_cond) {
    require_finite(z, "inverse_y");
    require_finite(a_cond, "inverse_y");
    FlowEvaluator ev(params);
    return ev.outcome_spline(a_cond).inverse(z);
}

std::vector<double> param_gradient(const FlowParams& params, std::span<const Observation> batch,
                                   const CopulaParam& rho) {
    std::vector<double> grad(params.theta.size(), 0.0);
    FlowEvaluator ev(params);
    ev.nll(batch, rho, grad);
    return grad;
}

// ---------------------------------------------------------------------------

void save_params(const FlowParams& params, std::ostream& out) {
    const auto& h = params.hyper;
    out << kParamsMagic << ' ' << kParamsVersion << '\n';
    out << "bins_a " << h.bins_a << '\n';
    out << "bins_y " << h.bins_y << '\n';
    out << "hidden";
    for (int w : h.hidden) out << ' ' << w;
    out << '\n';
    out << "activation " << to_string(h.activation) << '\n';
    out << "range_a " << format_double(h.range_a.lo) << ' ' << format_double(h.range_a.hi) << '\n';
    out << "range_y " << format_double(h.range_y.lo) << ' ' << format_double(h.range_y.hi) << '\n';
    out << "cond_center " << format_double(h.cond_center) << '\n';
    out << "cond_scale " << format_double(h.cond_scale) << '\n';
    out << "theta " << params.theta.size() << '\n';
    for (double v : params.theta) out << format_double(v) << '\n';
}

namespace {

struct LineReader {
    std::istream& in;
    std::size_t line_no = 0;

    std::istringstream next(const char* expected_key) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            std::istringstream fields(line);
            std::string key;
            fields >> key;
            if (expected_key && key != expected_key) {
                throw DataError(std::string("expected '") + expected_key + "', found '" + key + "'", line_no);
            }
            if (!expected_key) fields.seekg(0);
            return fields;
        }
        throw DataError(std::string("unexpected end of parameter file, expected ") +
                            (expected_key ? expected_key : "value"),
                        line_no);
    }

    double parse_double(const std::string& tok) const {
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
            throw DataError("invalid number '" + tok + "'", line_no);
        }
        return v;
    }

    template <typename T>
    T read(std::istringstream& fields) const {
        std::string tok;
        if (!(fields >> tok)) throw DataError("missing value", line_no);
        if constexpr (std::is_same_v<T, double>) {
            return parse_double(tok);
        } else if constexpr (std::is_same_v<T, std::string>) {
            return tok;
        } else {
            T v{};
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
                throw DataError("invalid integer '" + tok + "'", line_no);
            }
            return v;
        }
    }
};

}  // namespace

FlowParams load_params(std::istream& in) {
    LineReader reader{in};
    {
        auto header = reader.next(kParamsMagic);
        const int version = reader.read<int>(header);
        if (version != kParamsVersion) {
            throw DataError("unsupported parameter file version " + std::to_string(version), reader.line_no);
        }
    }
    FlowParams p;
    auto& h = p.hyper;
    {
        auto f = reader.next("bins_a");
        h.bins_a = reader.read<int>(f);
    }
    {
        auto f = reader.next("bins_y");
        h.bins_y = reader.read<int>(f);
    }
    {
        auto f = reader.next("hidden");
        h.hidden.clear();
        int w = 0;
        std::string tok;
        while (f >> tok) {
            std::istringstream one(tok);
            w = reader.read<int>(one);
            h.hidden.push_back(w);
        }
    }
    {
        auto f = reader.next("activation");
        try {
            h.activation = activation_from_string(reader.read<std::string>(f));
        } catch (const InvalidParameter& e) {
            throw DataError(e.what(), reader.line_no);
        }
    }
    {
        auto f = reader.next("range_a");
        h.range_a.lo = reader.read<double>(f);
        h.range_a.hi = reader.read<double>(f);
    }
    {
        auto f = reader.next("range_y");
        h.range_y.lo = reader.read<double>(f);
        h.range_y.hi = reader.read<double>(f);
    }
    {
        auto f = reader.next("cond_center");
        h.cond_center = reader.read<double>(f);
    }
    {
        auto f = reader.next("cond_scale");
        h.cond_scale = reader.read<double>(f);
    }
    std::size_t count = 0;
    {
        auto f = reader.next("theta");
        count = reader.read<std::size_t>(f);
    }
    try {
        h.validate();
    } catch (const InvalidParameter& e) {
        throw DataError(e.what(), reader.line_no);
    }
    if (count != h.treatment_param_count() + h.outcome_param_count()) {
        throw DataError("theta length does not match the architecture", reader.line_no);
    }
    p.theta.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto f = reader.next(nullptr);
        p.theta[i] = reader.read<double>(f);
    }
    return p;
}

}  // namespace rhognf
