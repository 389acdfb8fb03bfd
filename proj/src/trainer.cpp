#include "jacshield/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "jacshield/robustness.hpp"

namespace jacshield {

const char* optimizer_kind_name(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::kAdam: return "adam";
        case OptimizerKind::kRmsProp: return "rmsprop";
        case OptimizerKind::kSgd: return "sgd";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (adv_fraction < 0.0 || adv_fraction > 1.0) {
        throw ConfigError("train: adv_fraction must be in [0,1]");
    }
    if (adv_fraction > 0.0 && !adv_attack) {
        throw ConfigError("train: adv_fraction > 0 requires adv_attack");
    }
    if (probe_size < 1) throw ConfigError("train: probe_size must be >= 1");
    loss.validate();
    if (adv_attack) adv_attack->validate();
}

Batch mix_adversarial(Batch batch, const Network& net, const AttackConfig& attack_cfg,
                      double fraction, std::uint64_t seed, std::size_t batch_index) {
    if (fraction < 0.0 || fraction > 1.0) throw Error("mix_adversarial: fraction out of range");
    std::size_t n_pert = static_cast<std::size_t>(fraction * static_cast<double>(batch.inputs.size()));
    if (n_pert == 0) return batch;

    Rng rng(mix_seed(mix_seed(seed, 0xADF1), batch_index));
    std::vector<std::size_t> order(batch.inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < n_pert; ++i) {
        std::size_t j = i + rng.uniform_index(order.size() - i);
        std::swap(order[i], order[j]);
    }
    for (std::size_t i = 0; i < n_pert; ++i) {
        std::size_t idx = order[i];
        AttackOutcome a = run_attack(net, batch.inputs[idx], batch.labels[idx], attack_cfg);
        batch.inputs[idx] = std::move(a.x_pert);  // label stays the original
    }
    return batch;
}

namespace {

void adam_update(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, std::size_t t,
                 const OptimizerConfig& c) {
    double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= c.rate * mhat / (std::sqrt(vhat) + c.eps);
    }
}

void rmsprop_update(Tensor& p, const Tensor& g, Tensor& v, const OptimizerConfig& c) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = c.decay * v[i] + (1.0 - c.decay) * g[i] * g[i];
        p[i] -= c.rate * g[i] / (std::sqrt(v[i]) + c.eps);
    }
}

void sgd_update(Tensor& p, const Tensor& g, const OptimizerConfig& c) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= c.rate * g[i];
}

}  // namespace

void optimizer_step(Network& net, const std::vector<Tensor>& grad_w,
                    const std::vector<Tensor>& grad_b, OptState& state,
                    const OptimizerConfig& cfg) {
    if (state.m_w.empty()) {
        state.m_w.resize(net.layers.size());
        state.v_w.resize(net.layers.size());
        state.m_b.resize(net.layers.size());
        state.v_b.resize(net.layers.size());
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            if (!net.layers[i].has_params()) continue;
            state.m_w[i] = Tensor::zeros(net.weights[i].shape);
            state.v_w[i] = Tensor::zeros(net.weights[i].shape);
            state.m_b[i] = Tensor::zeros(net.biases[i].shape);
            state.v_b[i] = Tensor::zeros(net.biases[i].shape);
        }
    }
    ++state.t;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].has_params()) continue;
        if (!grad_w[i].all_finite() || !grad_b[i].all_finite()) {
            throw NumericError("optimizer: non-finite gradient at layer " + std::to_string(i));
        }
        if (net.layers[i].frozen) continue;  // moments also stay untouched
        switch (cfg.kind) {
            case OptimizerKind::kAdam:
                adam_update(net.weights[i], grad_w[i], state.m_w[i], state.v_w[i], state.t, cfg);
                adam_update(net.biases[i], grad_b[i], state.m_b[i], state.v_b[i], state.t, cfg);
                break;
            case OptimizerKind::kRmsProp:
                rmsprop_update(net.weights[i], grad_w[i], state.v_w[i], cfg);
                rmsprop_update(net.biases[i], grad_b[i], state.v_b[i], cfg);
                break;
            case OptimizerKind::kSgd:
                sgd_update(net.weights[i], grad_w[i], cfg);
                sgd_update(net.biases[i], grad_b[i], cfg);
                break;
        }
    }
}

namespace {

std::pair<Network, TrainHistory> run_epochs(Network net, const Dataset& train,
                                            const Dataset& test, const TrainConfig& cfg,
                                            std::size_t epochs, int phase) {
    cfg.validate();
    if (train.size() == 0) throw Error("train: empty training set");

    TrainHistory history;
    if (epochs == 0) return {std::move(net), history};

    std::vector<const Tensor*> probe;
    const Dataset& probe_src = test.size() > 0 ? test : train;
    for (std::size_t i = 0; i < std::min(cfg.probe_size, probe_src.size()); ++i) {
        probe.push_back(&probe_src.inputs[i]);
    }

    OptState state;
    std::size_t global_step = 0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::size_t> order(train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(mix_seed(mix_seed(cfg.seed, 0x50F1), epoch));
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            std::size_t j = i + shuffle_rng.uniform_index(order.size() - i);
            std::swap(order[i], order[j]);
        }

        KahanSum loss_sum, ce_sum, penalty_sum;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            Batch batch;
            batch.inputs.reserve(stop - start);
            batch.labels.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.inputs.push_back(train.inputs[order[i]]);
                batch.labels.push_back(Label(train.labels[order[i]]));
            }
            if (cfg.adv_fraction > 0.0 && cfg.adv_attack) {
                // regenerated every epoch against the current weights
                batch = mix_adversarial(std::move(batch), net, *cfg.adv_attack,
                                        cfg.adv_fraction, cfg.seed, global_step);
            }

            try {
                Graph g;
                NetGraphRefs refs = bind_weights(g, net);
                std::vector<NodeId> wrt;
                std::vector<std::size_t> wrt_layer;
                CompositeLossBuild loss =
                    composite_loss(g, net, refs, batch.inputs, batch.labels, cfg.loss,
                                   Mode::kTrain, mix_seed(cfg.seed, global_step));
                for (std::size_t i = 0; i < net.layers.size(); ++i) {
                    if (!net.layers[i].has_params()) continue;
                    wrt.push_back(refs.weights[i]);
                    wrt.push_back(refs.biases[i]);
                    wrt_layer.push_back(i);
                }
                std::vector<NodeId> grads = g.gradient(loss.total, wrt);
                std::vector<NodeId> outs{loss.total, loss.ce_sum, loss.penalty};
                outs.insert(outs.end(), grads.begin(), grads.end());
                std::vector<Tensor> values = g.evaluate(outs);

                loss_sum.add(values[0][0]);
                ce_sum.add(values[1][0]);
                penalty_sum.add(values[2][0]);

                std::vector<Tensor> grad_w(net.layers.size());
                std::vector<Tensor> grad_b(net.layers.size());
                for (std::size_t k = 0; k < wrt_layer.size(); ++k) {
                    grad_w[wrt_layer[k]] = std::move(values[3 + 2 * k]);
                    grad_b[wrt_layer[k]] = std::move(values[3 + 2 * k + 1]);
                }
                optimizer_step(net, grad_w, grad_b, state, cfg.optimizer);
                for (std::size_t i = 0; i < net.layers.size(); ++i) {
                    if (net.layers[i].has_params() && !net.weights[i].all_finite()) {
                        throw NumericError("weights overflowed at layer " + std::to_string(i));
                    }
                }
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                   " (phase " + std::to_string(phase) + "): " + e.what());
            }
            ++global_step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.phase = phase;
        rec.loss_total = loss_sum.value();
        rec.ce_total = ce_sum.value();
        rec.penalty_total = penalty_sum.value();
        try {
            rec.test_accuracy = test.size() > 0 ? clean_accuracy(net, test) : 0.0;
            KahanSum jac;
            for (const Tensor* x : probe) jac.add(jacobian(net, *x).frobenius());
            rec.avg_jac_fro_probe =
                probe.empty() ? 0.0 : jac.value() / static_cast<double>(probe.size());
        } catch (const NumericError& e) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                               " (phase " + std::to_string(phase) + "): " + e.what());
        }
        history.push_back(rec);
    }
    return {std::move(net), std::move(history)};
}

}  // namespace

std::pair<Network, TrainHistory> train_phase(Network net, const Dataset& train,
                                             const Dataset& test, const TrainConfig& cfg) {
    return run_epochs(std::move(net), train, test, cfg, cfg.epochs_phase1, 1);
}

std::pair<Network, TrainHistory> post_process(Network net, const Dataset& train,
                                              const Dataset& test, const TrainConfig& cfg) {
    if (cfg.loss.reg_kind == RegKind::kNone && cfg.loss.lambda != 0.0) {
        throw ConfigError("post_process: reg_kind must be set when lambda > 0");
    }
    return run_epochs(std::move(net), train, test, cfg, cfg.epochs_phase2, 2);
}

}  // namespace jacshield
