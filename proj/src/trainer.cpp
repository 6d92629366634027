#include "rhognf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "rhognf/adam.hpp"
#include "rhognf/errors.hpp"

namespace rhognf {

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

template <typename Proj>
Moments moments(std::span<const Observation> data, Proj proj) {
    Moments m;
    m.min = m.max = proj(data.front());
    for (const auto& o : data) {
        const double v = proj(o);
        m.mean += v;
        m.min = std::min(m.min, v);
        m.max = std::max(m.max, v);
    }
    m.mean /= static_cast<double>(data.size());
    for (const auto& o : data) {
        const double d = proj(o) - m.mean;
        m.sd += d * d;
    }
    m.sd = std::sqrt(m.sd / static_cast<double>(data.size()));
    return m;
}

Interval padded_range(const Moments& m, const char* column) {
    const double r = m.max - m.min;
    if (!(r > 0.0)) throw InvalidInput(std::string("column ") + column + " is constant in the training split");
    return {m.min - 0.5 * r, m.max + 0.5 * r};
}

// Observations that stay unreadable until the optimization loop has ended.
class SealedSplit {
public:
    class Key {
        friend FitReport rhognf::fit(std::span<const Observation>, const TrainConfig&);
        Key() = default;
    };

    explicit SealedSplit(std::vector<Observation> data) : data_(std::move(data)) {}
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const Observation> open(Key) const noexcept { return data_; }

private:
    std::vector<Observation> data_;
};

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void TrainConfig::validate() const {
    if (!(std::abs(rho) < 1.0)) throw InvalidInput("training rho must lie strictly inside (-1, 1)");
    if (batch_size < 1) throw InvalidInput("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
    if (max_epochs < 1) throw InvalidInput("max_epochs must be positive");
    if (patience < 1) throw InvalidInput("patience must be positive");
    if (!(split.train > 0.0 && split.val > 0.0 && split.test > 0.0)) {
        throw InvalidInput("split weights must be positive");
    }
    if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
        throw InvalidInput("split weights must sum to 1");
    }
}

double joint_log_density(const FlowParams& params, const CopulaParam& rho, double a, double y) {
    const TransformEval ea = forward_a(params, a);
    const TransformEval ey = forward_y(params, y, a);
    return log_density(rho, {ea.value, ey.value}) + ea.log_deriv + ey.log_deriv;
}

double evaluate_nll(const FlowParams& params, const CopulaParam& rho, std::span<const Observation> data) {
    if (data.empty()) throw InvalidInput("evaluate_nll: empty dataset");
    FlowEvaluator ev(params);
    return ev.nll(data, rho, {});
}

FlowHyper derive_hyper(const FlowHyper& architecture, std::span<const Observation> data) {
    if (data.empty()) throw InvalidInput("cannot derive transform ranges from an empty dataset");
    FlowHyper h = architecture;
    const auto ma = moments(data, [](const Observation& o) { return o.a; });
    const auto my = moments(data, [](const Observation& o) { return o.y; });
    h.range_a = padded_range(ma, "a");
    h.range_y = padded_range(my, "y");
    h.cond_center = ma.mean;
    h.cond_scale = ma.sd;
    h.validate();
    return h;
}

FitReport fit(std::span<const Observation> dataset, const TrainConfig& config) {
    config.validate();
    if (dataset.size() < kMinFitSize) {
        throw InvalidInput("fit needs at least " + std::to_string(kMinFitSize) + " observations");
    }
    for (const auto& o : dataset) {
        if (!std::isfinite(o.a) || !std::isfinite(o.y)) throw InvalidInput("fit: dataset contains a non-finite value");
    }
    const CopulaParam rho(config.rho);
    Rng rng(config.seed);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto n = static_cast<double>(dataset.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * config.split.train));
    const auto n_val = static_cast<std::size_t>(std::llround(n * config.split.val));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= dataset.size()) {
        throw InvalidInput("split ratio leaves an empty partition");
    }
    if (static_cast<std::size_t>(config.batch_size) > n_train) {
        throw InvalidInput("batch_size exceeds the training split");
    }
    std::vector<Observation> train, val, test;
    train.reserve(n_train);
    val.reserve(n_val);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& o = dataset[order[i]];
        if (i < n_train) {
            train.push_back(o);
        } else if (i < n_train + n_val) {
            val.push_back(o);
        } else {
            test.push_back(o);
        }
    }
    const SealedSplit sealed_test(std::move(test));

    const FlowHyper hyper = derive_hyper(config.architecture, train);
    FlowParams params = FlowParams::identity(hyper, config.seed);
    FlowEvaluator ev(params);

    FitReport report;
    report.rho = config.rho;
    report.n_train = train.size();
    report.n_val = val.size();
    report.n_test = sealed_test.size();

    double best_val = ev.nll(val, rho, {});
    report.history.push_back({0, ev.nll(train, rho, {}), best_val});
    if (!std::isfinite(best_val)) throw DivergedFit(0, "non-finite validation loss at initialization");
    std::vector<double> best_theta = params.theta;
    int best_epoch = 0;
    int since_best = 0;

    Adam adam(params.theta.size(), AdamConfig{.learning_rate = config.learning_rate});
    std::vector<double> grad(params.theta.size());
    std::vector<Observation> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_size));
    std::vector<std::size_t> perm(train.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    int epoch = 0;
    for (epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < perm.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(perm.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(train[perm[i]]);
            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = ev.nll(batch, rho, grad);
            if (!std::isfinite(loss) || !all_finite(grad)) {
                throw DivergedFit(epoch, "non-finite loss or gradient in epoch " + std::to_string(epoch));
            }
            adam.step(params.theta, grad);
            loss_sum += loss * static_cast<double>(stop - start);
        }
        const double val_nll = ev.nll(val, rho, {});
        if (!std::isfinite(val_nll)) {
            throw DivergedFit(epoch, "non-finite validation loss in epoch " + std::to_string(epoch));
        }
        report.history.push_back({epoch, loss_sum / static_cast<double>(train.size()), val_nll});
        if (val_nll < best_val) {
            best_val = val_nll;
            best_theta = params.theta;
            best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    report.epochs_run = std::min(epoch, config.max_epochs);

    params.theta = std::move(best_theta);
    report.best_epoch = best_epoch;
    report.train_nll = ev.nll(train, rho, {});
    report.val_nll = best_val;
    report.test_nll = ev.nll(sealed_test.open(SealedSplit::Key{}), rho, {});
    report.final_params = std::move(params);
    return report;
}

}  // namespace rhognf
