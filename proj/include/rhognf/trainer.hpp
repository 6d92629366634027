#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rhognf/copula.hpp"
#include "rhognf/flow.hpp"
#include "rhognf/observation.hpp"

namespace rhognf {

struct SplitRatio {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct TrainConfig {
    double rho = 0.0;
    int batch_size = 128;
    double learning_rate = 3e-4;
    int max_epochs = 200;
    int patience = 20;
    SplitRatio split;
    std::uint64_t seed = 0;
    // Bin counts, hidden widths and activation are taken from here; ranges
    // and conditioner scaling are derived from the training split.
    FlowHyper architecture;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    // train_nll is the mean minibatch loss over the epoch, val_nll the full
    // validation NLL after it. Epoch 0 holds both splits at initialization.
    double train_nll = 0.0;
    double val_nll = 0.0;
};

struct FitReport {
    FlowParams final_params;
    double rho = 0.0;
    double train_nll = 0.0;
    double val_nll = 0.0;
    double test_nll = 0.0;
    int epochs_run = 0;
    int best_epoch = 0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    std::vector<EpochRecord> history;
};

// log f_{A,Y}(a, y) = log f_{Z_A,Z_Y}(T_A(a), T_{Y|a}(y))
//                     + log T_A'(a) + log T_{Y|a}'(y)
double joint_log_density(const FlowParams& params, const CopulaParam& rho, double a, double y);

// Mean negative log-likelihood. Throws InvalidInput on an empty dataset.
double evaluate_nll(const FlowParams& params, const CopulaParam& rho, std::span<const Observation> data);

// Architecture with ranges and conditioner scaling derived from `data`:
// each range is [min - range/2, max + range/2].
FlowHyper derive_hyper(const FlowHyper& architecture, std::span<const Observation> data);

inline constexpr std::size_t kMinFitSize = 100;

// Maximum-likelihood fit at a fixed rho with mini-batch Adam and early
// stopping on the validation split. Deterministic given config.seed.
FitReport fit(std::span<const Observation> dataset, const TrainConfig& config);

}  // namespace rhognf
