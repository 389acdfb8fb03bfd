#ifndef JACSHIELD_AUTODIFF_HPP
#define JACSHIELD_AUTODIFF_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "jacshield/tensor.hpp"

namespace jacshield {

// Reverse-mode automatic differentiation over a dynamically built,
// append-only computation graph.
//
// gradient() does not produce numbers; it emits new graph nodes that
// compute the requested adjoints. Those nodes are ordinary primitives, so
// a second gradient() call over them yields exact second-order
// derivatives. This one mechanism carries every regularizer in the
// project (all of them differentiate a gradient with respect to weights).

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class Op : std::uint8_t {
    kLeaf,      // externally bound value
    kConst,     // immutable value captured at build time
    kAdd,
    kSub,
    kMul,
    kDiv,
    kMax,       // elementwise max
    kMatmul,    // [m,k] x [k,n]
    kTranspose, // 2-D
    kRelu,
    kTanh,
    kExp,
    kLog,
    kSqrt,
    kReluMask,  // 1 where x > 0 else 0 (piecewise constant, zero VJP)
    kGeMask,    // 1 where a >= b else 0 (piecewise constant, zero VJP)
    kSum,       // full reduction to shape {1}
    kBroadcast, // scalar -> arbitrary shape
    kReshape,
    kGather,     // out[i] = in[idx[i]], idx is a build-time constant
    kScatterAdd, // out[idx[i]] += in[i]
    kSoftmax,    // flat vector, numerically stable
    kSoftmaxXent // fused -sum(y * log softmax(z)), numerically stable
};

const char* op_name(Op op);

struct Node {
    Op op = Op::kLeaf;
    Shape shape;
    NodeId a = kNoNode;
    NodeId b = kNoNode;
    std::int32_t payload = -1;  // kLeaf/kConst: index into value storage
    std::int32_t iset = -1;     // kGather/kScatterAdd: index set id
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
};

class Graph {
public:
    // ---- leaves and constants -------------------------------------------
    NodeId input(Shape shape);          // unbound; bind() before evaluate()
    NodeId constant(Tensor value);
    NodeId scalar_const(double v) { return constant(Tensor::scalar(v)); }

    void bind(NodeId leaf, Tensor value);
    bool is_bound(NodeId leaf) const;
    const Tensor& bound_value(NodeId leaf_or_const) const;

    // ---- primitives ------------------------------------------------------
    // Elementwise binaries accept equal shapes, or a scalar on either side.
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId max(NodeId a, NodeId b);
    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    NodeId relu(NodeId a);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId sqrt(NodeId a);
    NodeId relu_mask(NodeId a);
    NodeId ge_mask(NodeId a, NodeId b);
    NodeId sum(NodeId a);
    NodeId broadcast(NodeId scalar, Shape target);
    NodeId reshape(NodeId a, Shape target);
    NodeId gather(NodeId a, std::vector<std::uint32_t> indices);
    NodeId gather(NodeId a, std::int32_t interned_indices);
    NodeId scatter_add(NodeId a, std::vector<std::uint32_t> indices, Shape out_shape);
    NodeId scatter_add_interned(NodeId a, std::int32_t interned_indices, Shape out_shape);
    NodeId softmax(NodeId a);
    NodeId softmax_xent(NodeId logits, NodeId target_distribution);

    // Index sets may be shared between many gather nodes (convolutions
    // reuse one im2col map per layer).
    std::int32_t intern_indices(std::vector<std::uint32_t> indices);

    // ---- composites (built from the primitives above) ---------------------
    NodeId neg(NodeId a) { return sub(scalar_const(0.0), a); }
    NodeId square(NodeId a) { return mul(a, a); }
    NodeId scale(NodeId a, double c) { return mul(a, scalar_const(c)); }
    NodeId dot(NodeId a, NodeId b) { return sum(mul(a, b)); }
    NodeId slice(NodeId a, std::size_t offset, std::size_t length);

    // ---- execution --------------------------------------------------------
    // Values for the requested nodes, in request order. Intermediate
    // storage is freed as soon as the last consumer has run. Every
    // computed tensor is checked for NaN/Inf; violations raise
    // NumericError instead of propagating.
    std::vector<Tensor> evaluate(std::span<const NodeId> outputs) const;
    Tensor evaluate_one(NodeId output) const;

    // ---- differentiation ---------------------------------------------------
    // Emits adjoint computations for `scalar` (shape {1}) and returns, for
    // each wrt node, the node computing d scalar / d wrt. A wrt node that
    // is not an ancestor of `scalar` yields a constant zero tensor of its
    // shape (not an error). Nesting is legal: the returned nodes are
    // ordinary primitives.
    std::vector<NodeId> gradient(NodeId scalar, std::span<const NodeId> wrt);
    NodeId gradient_one(NodeId scalar, NodeId wrt);

    // Central finite differences oracle on a bound leaf: perturbs every
    // element of the binding by +-step and compares against the autodiff
    // gradient. Relative error denominator is max(|a|, |b|, 1e-8).
    GradCheckReport check_gradient(NodeId scalar, NodeId wrt_leaf, double step, double tol);

    // ---- introspection -----------------------------------------------------
    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id]; }
    const Shape& shape(NodeId id) const { return nodes_[id].shape; }

private:
    NodeId push(Node n);
    NodeId binary(Op op, NodeId a, NodeId b);
    const Shape& binary_result_shape(NodeId a, NodeId b, const char* what) const;
    void check_id(NodeId id, const char* what) const;

    // Accumulate `contrib` (shaped like node `out`) into the adjoint of
    // operand `operand`, reducing/reshaping when the operand is scalar.
    void accumulate(std::vector<NodeId>& adj, const std::vector<char>& needed,
                    NodeId operand, NodeId contrib, NodeId out);
    void emit_vjp(NodeId id, NodeId g, std::vector<NodeId>& adj,
                  const std::vector<char>& needed);

    std::vector<Node> nodes_;
    std::vector<Tensor> payloads_;
    std::vector<char> payload_bound_;
    std::vector<std::vector<std::uint32_t>> index_sets_;
};

}  // namespace jacshield

#endif
