#include "jacshield/regularizers.hpp"

namespace jacshield {

const char* reg_kind_name(RegKind kind) {
    switch (kind) {
        case RegKind::kNone: return "none";
        case RegKind::kJacobian: return "jacobian";
        case RegKind::kInputGradient: return "input_gradient";
        case RegKind::kCrossLipschitz: return "cross_lipschitz";
    }
    return "?";
}

void LossConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("loss: lambda must be nonnegative");
    if (reg_layer != JacobianLayer::kL && reg_kind != RegKind::kJacobian) {
        throw ConfigError("loss: reg_layer other than L requires reg_kind == jacobian");
    }
}

Tensor Label::one_hot(std::size_t classes) const {
    if (index >= classes) {
        throw Error("label " + std::to_string(index) + " out of range for " +
                    std::to_string(classes) + " classes");
    }
    Tensor t = Tensor::zeros({classes});
    t[index] = 1.0;
    return t;
}

NodeId cross_entropy(Graph& g, NodeId logits, const Label& label, std::size_t classes) {
    return g.softmax_xent(logits, g.constant(label.one_hot(classes)));
}

std::vector<NodeId> jacobian_row_nodes(Graph& g, const ForwardTaps& taps, JacobianLayer layer,
                                       NodeId x) {
    NodeId target = kNoNode;
    switch (layer) {
        case JacobianLayer::kL: target = taps.logits; break;
        case JacobianLayer::kLm1: target = taps.has_lm1 ? taps.tap_lm1 : kNoNode; break;
        case JacobianLayer::kLm2: target = taps.has_lm2 ? taps.tap_lm2 : kNoNode; break;
    }
    if (target == kNoNode) {
        throw Error(std::string("jacobian penalty: layer ") + jacobian_layer_name(layer) +
                    " is not available for this architecture");
    }
    std::size_t rows = numel(g.shape(target));
    std::vector<NodeId> out;
    out.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out.push_back(g.gradient_one(g.slice(target, r, 1), x));
    }
    return out;
}

namespace {

struct SampleBuild {
    NodeId x = kNoNode;
    ForwardTaps taps;
};

SampleBuild build_sample(Graph& g, const Network& net, NetGraphRefs& refs, const Tensor& x,
                         Mode mode, std::uint64_t stream) {
    SampleBuild s;
    s.x = g.input(x.shape);
    g.bind(s.x, x);
    s.taps = build_forward(g, net, refs, s.x, mode, stream);
    return s;
}

// sum_k ||row_k||^2 for one sample
NodeId squared_row_sum(Graph& g, const std::vector<NodeId>& rows) {
    NodeId acc = kNoNode;
    for (NodeId r : rows) {
        NodeId s = g.sum(g.square(r));
        acc = acc == kNoNode ? s : g.add(acc, s);
    }
    return acc;
}

NodeId jacobian_penalty_from_samples(Graph& g, std::span<const SampleBuild> samples,
                                     const LossConfig& cfg) {
    if (cfg.per_sample_sqrt) {
        NodeId acc = kNoNode;
        for (const SampleBuild& s : samples) {
            NodeId sq = squared_row_sum(g, jacobian_row_nodes(g, s.taps, cfg.reg_layer, s.x));
            NodeId nrm = g.sqrt(sq);
            acc = acc == kNoNode ? nrm : g.add(acc, nrm);
        }
        return acc;
    }
    NodeId total = kNoNode;
    for (const SampleBuild& s : samples) {
        NodeId sq = squared_row_sum(g, jacobian_row_nodes(g, s.taps, cfg.reg_layer, s.x));
        total = total == kNoNode ? sq : g.add(total, sq);
    }
    return g.sqrt(total);
}

NodeId input_gradient_from_samples(Graph& g, std::span<const SampleBuild> samples,
                                   std::span<const Label> labels, std::size_t classes) {
    NodeId acc = kNoNode;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        NodeId ce = cross_entropy(g, samples[i].taps.logits, labels[i], classes);
        NodeId gx = g.gradient_one(ce, samples[i].x);
        NodeId sq = g.sum(g.square(gx));
        acc = acc == kNoNode ? sq : g.add(acc, sq);
    }
    return acc;
}

NodeId cross_lipschitz_from_samples(Graph& g, std::span<const SampleBuild> samples) {
    NodeId acc = kNoNode;
    for (const SampleBuild& s : samples) {
        std::vector<NodeId> rows = jacobian_row_nodes(g, s.taps, JacobianLayer::kL, s.x);
        for (std::size_t k = 1; k < rows.size(); ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                NodeId d = g.sub(rows[k], rows[j]);
                NodeId sq = g.sum(g.square(d));
                acc = acc == kNoNode ? sq : g.add(acc, sq);
            }
        }
    }
    // ordered pairs count each unordered pair twice
    return acc == kNoNode ? g.scalar_const(0.0) : g.scale(acc, 2.0);
}

std::vector<SampleBuild> build_samples(Graph& g, const Network& net, NetGraphRefs& refs,
                                       std::span<const Tensor> batch, Mode mode,
                                       std::uint64_t stream_base) {
    if (batch.empty()) throw Error("penalty: empty batch");
    std::vector<SampleBuild> samples;
    samples.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        samples.push_back(build_sample(g, net, refs, batch[i], mode, mix_seed(stream_base, i)));
    }
    return samples;
}

}  // namespace

NodeId jacobian_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                        std::span<const Tensor> batch, const LossConfig& cfg, Mode mode,
                        std::uint64_t stream_base) {
    cfg.validate();
    if (cfg.reg_kind != RegKind::kJacobian) {
        throw Error("jacobian_penalty: cfg.reg_kind must be jacobian");
    }
    auto samples = build_samples(g, net, refs, batch, mode, stream_base);
    return g.scale(jacobian_penalty_from_samples(g, samples, cfg), cfg.lambda);
}

NodeId input_gradient_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                              std::span<const Tensor> batch, std::span<const Label> labels,
                              Mode mode, std::uint64_t stream_base) {
    if (labels.size() != batch.size()) {
        throw Error("input_gradient_penalty: labels misaligned with batch");
    }
    auto samples = build_samples(g, net, refs, batch, mode, stream_base);
    return input_gradient_from_samples(g, samples, labels, net.output_dim);
}

NodeId cross_lipschitz_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                               std::span<const Tensor> batch, Mode mode,
                               std::uint64_t stream_base) {
    auto samples = build_samples(g, net, refs, batch, mode, stream_base);
    return cross_lipschitz_from_samples(g, samples);
}

CompositeLossBuild composite_loss(Graph& g, const Network& net, NetGraphRefs& refs,
                                  std::span<const Tensor> batch, std::span<const Label> labels,
                                  const LossConfig& cfg, Mode mode, std::uint64_t stream_base) {
    cfg.validate();
    if (labels.size() != batch.size()) throw Error("composite_loss: labels misaligned");
    auto samples = build_samples(g, net, refs, batch, mode, stream_base);

    NodeId ce_sum = kNoNode;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        NodeId ce = cross_entropy(g, samples[i].taps.logits, labels[i], net.output_dim);
        ce_sum = ce_sum == kNoNode ? ce : g.add(ce_sum, ce);
    }

    CompositeLossBuild out;
    out.ce_sum = ce_sum;
    if (cfg.reg_kind == RegKind::kNone || cfg.lambda == 0.0) {
        out.penalty = g.scalar_const(0.0);
        out.total = ce_sum;
        return out;
    }

    // The penalty may run over a separate dropout-free forward.
    std::vector<SampleBuild> penalty_samples;
    std::span<const SampleBuild> pspan(samples);
    if (cfg.jacobian_eval_mode && mode == Mode::kTrain) {
        penalty_samples = build_samples(g, net, refs, batch, Mode::kEval, stream_base);
        pspan = penalty_samples;
    }

    NodeId raw = kNoNode;
    switch (cfg.reg_kind) {
        case RegKind::kJacobian:
            raw = jacobian_penalty_from_samples(g, pspan, cfg);
            break;
        case RegKind::kInputGradient:
            raw = input_gradient_from_samples(g, pspan, labels, net.output_dim);
            break;
        case RegKind::kCrossLipschitz:
            raw = cross_lipschitz_from_samples(g, pspan);
            break;
        case RegKind::kNone:
            break;
    }
    out.penalty = g.scale(raw, cfg.lambda);
    out.total = g.add(ce_sum, out.penalty);
    return out;
}

}  // namespace jacshield
