#ifndef JACSHIELD_TRAINER_HPP
#define JACSHIELD_TRAINER_HPP

#include "jacshield/attacks.hpp"
#include "jacshield/data_io.hpp"

namespace jacshield {

enum class OptimizerKind : std::uint8_t { kAdam = 0, kRmsProp = 1, kSgd = 2 };

const char* optimizer_kind_name(OptimizerKind kind);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kAdam;
    double rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double decay = 0.9;  // rmsprop
    double eps = 1e-8;
};

struct TrainConfig {
    OptimizerConfig optimizer;
    std::size_t batch_size = 50;
    std::size_t epochs_phase1 = 0;
    std::size_t epochs_phase2 = 0;
    LossConfig loss;
    double adv_fraction = 0.0;
    std::optional<AttackConfig> adv_attack;
    std::uint64_t seed = 0;
    std::size_t probe_size = 100;  // test samples probed for avg ||J||_F per epoch

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    int phase = 1;
    double loss_total = 0.0;     // composite loss summed over the epoch's batches
    double ce_total = 0.0;
    double penalty_total = 0.0;
    double test_accuracy = 0.0;
    double avg_jac_fro_probe = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct Batch {
    std::vector<Tensor> inputs;
    std::vector<Label> labels;
};

// Replaces floor(fraction * |batch|) seeded-random entries by their
// attacked versions, keeping the original labels. Deterministic per
// (seed, batch_index).
Batch mix_adversarial(Batch batch, const Network& net, const AttackConfig& attack_cfg,
                      double fraction, std::uint64_t seed, std::size_t batch_index);

struct OptState {
    std::vector<Tensor> m_w, v_w, m_b, v_b;
    std::size_t t = 0;
};

// One update over all unfrozen parametric layers. Adam uses
// bias-corrected moments.
void optimizer_step(Network& net, const std::vector<Tensor>& grad_w,
                    const std::vector<Tensor>& grad_b, OptState& state,
                    const OptimizerConfig& cfg);

// Mini-batch optimization of the composite loss for cfg.epochs_phase1
// epochs. Deterministic given cfg.seed; frozen layers never change.
// Non-finite loss aborts with the offending epoch index.
std::pair<Network, TrainHistory> train_phase(Network net, const Dataset& train,
                                             const Dataset& test, const TrainConfig& cfg);

// Phase-2 continuation with the regularized objective for
// cfg.epochs_phase2 epochs; identical mechanics, fresh optimizer state,
// history tagged as phase 2.
std::pair<Network, TrainHistory> post_process(Network net, const Dataset& train,
                                              const Dataset& test, const TrainConfig& cfg);

}  // namespace jacshield

#endif
