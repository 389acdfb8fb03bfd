#ifndef JACSHIELD_REGULARIZERS_HPP
#define JACSHIELD_REGULARIZERS_HPP

#include <span>

#include "jacshield/network.hpp"

namespace jacshield {

enum class RegKind : std::uint8_t {
    kNone = 0,
    kJacobian = 1,
    kInputGradient = 2,
    kCrossLipschitz = 3,
};

const char* reg_kind_name(RegKind kind);

struct LossConfig {
    double lambda = 0.0;
    RegKind reg_kind = RegKind::kNone;
    JacobianLayer reg_layer = JacobianLayer::kL;
    // false: one square root over the whole mini-batch sum (the printed
    // batch form); true: sum of per-sample Frobenius norms.
    bool per_sample_sqrt = false;
    // true: the penalty runs over a dropout-free forward even in train
    // mode; default reuses the training masks of the same batch.
    bool jacobian_eval_mode = false;

    void validate() const;
};

struct Label {
    std::size_t index = 0;

    Label() = default;
    explicit Label(std::size_t i) : index(i) {}
    Tensor one_hot(std::size_t classes) const;
};

// -log softmax(logits)[label], via the fused stable primitive.
NodeId cross_entropy(Graph& g, NodeId logits, const Label& label, std::size_t classes);

// Gradient-of-output rows d target_k / d x as graph nodes, one per unit
// of the selected layer.
std::vector<NodeId> jacobian_row_nodes(Graph& g, const ForwardTaps& taps, JacobianLayer layer,
                                       NodeId x);

// lambda * sqrt(sum_i sum_k ||d z_k(x_i)/d x||^2) by default (one root
// around the batch sum); per-sample form behind cfg.per_sample_sqrt.
NodeId jacobian_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                        std::span<const Tensor> batch, const LossConfig& cfg,
                        Mode mode = Mode::kEval, std::uint64_t stream_base = 0);

// sum_i ||d/dx CE(f(x_i), y_i)||^2 (no lambda; the composite applies it).
NodeId input_gradient_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                              std::span<const Tensor> batch, std::span<const Label> labels,
                              Mode mode = Mode::kEval, std::uint64_t stream_base = 0);

// sum_i sum_{j,k} ||d z_k/dx - d z_j/dx||^2 over ordered pairs (no lambda).
NodeId cross_lipschitz_penalty(Graph& g, const Network& net, NetGraphRefs& refs,
                               std::span<const Tensor> batch, Mode mode = Mode::kEval,
                               std::uint64_t stream_base = 0);

struct CompositeLossBuild {
    NodeId total = kNoNode;    // ce_sum + penalty
    NodeId ce_sum = kNoNode;   // sum of per-sample cross-entropies
    NodeId penalty = kNoNode;  // lambda-scaled regularization term
};

CompositeLossBuild composite_loss(Graph& g, const Network& net, NetGraphRefs& refs,
                                  std::span<const Tensor> batch, std::span<const Label> labels,
                                  const LossConfig& cfg, Mode mode = Mode::kEval,
                                  std::uint64_t stream_base = 0);

}  // namespace jacshield

#endif
