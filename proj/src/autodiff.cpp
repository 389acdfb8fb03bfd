#include "jacshield/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace jacshield {

namespace {

bool is_value_node(Op op) { return op == Op::kLeaf || op == Op::kConst; }

}  // namespace

const char* op_name(Op op) {
    switch (op) {
        case Op::kLeaf: return "leaf";
        case Op::kConst: return "const";
        case Op::kAdd: return "add";
        case Op::kSub: return "sub";
        case Op::kMul: return "mul";
        case Op::kDiv: return "div";
        case Op::kMax: return "max";
        case Op::kMatmul: return "matmul";
        case Op::kTranspose: return "transpose";
        case Op::kRelu: return "relu";
        case Op::kTanh: return "tanh";
        case Op::kExp: return "exp";
        case Op::kLog: return "log";
        case Op::kSqrt: return "sqrt";
        case Op::kReluMask: return "relu_mask";
        case Op::kGeMask: return "ge_mask";
        case Op::kSum: return "sum";
        case Op::kBroadcast: return "broadcast";
        case Op::kReshape: return "reshape";
        case Op::kGather: return "gather";
        case Op::kScatterAdd: return "scatter_add";
        case Op::kSoftmax: return "softmax";
        case Op::kSoftmaxXent: return "softmax_xent";
    }
    return "?";
}

NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_id(NodeId id, const char* what) const {
    if (id >= nodes_.size()) {
        throw Error(std::string(what) + ": node id " + std::to_string(id) + " out of range");
    }
}

NodeId Graph::input(Shape shape) {
    if (numel(shape) == 0) throw Error("input: empty shape");
    Node n;
    n.op = Op::kLeaf;
    n.shape = std::move(shape);
    n.payload = static_cast<std::int32_t>(payloads_.size());
    payloads_.emplace_back();
    payload_bound_.push_back(0);
    return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
    value.check_invariants();
    Node n;
    n.op = Op::kConst;
    n.shape = value.shape;
    n.payload = static_cast<std::int32_t>(payloads_.size());
    payloads_.push_back(std::move(value));
    payload_bound_.push_back(1);
    return push(std::move(n));
}

void Graph::bind(NodeId leaf, Tensor value) {
    check_id(leaf, "bind");
    Node& n = nodes_[leaf];
    if (n.op != Op::kLeaf) throw Error("bind: node is not a leaf");
    if (value.shape != n.shape) {
        throw Error("bind: shape mismatch, leaf " + shape_to_string(n.shape) + " vs value " +
                    shape_to_string(value.shape));
    }
    value.check_invariants();
    payloads_[n.payload] = std::move(value);
    payload_bound_[n.payload] = 1;
}

bool Graph::is_bound(NodeId leaf) const {
    check_id(leaf, "is_bound");
    const Node& n = nodes_[leaf];
    return is_value_node(n.op) && payload_bound_[n.payload];
}

const Tensor& Graph::bound_value(NodeId id) const {
    check_id(id, "bound_value");
    const Node& n = nodes_[id];
    if (!is_value_node(n.op)) throw Error("bound_value: node holds no value");
    if (!payload_bound_[n.payload]) throw Error("bound_value: leaf is unbound");
    return payloads_[n.payload];
}

const Shape& Graph::binary_result_shape(NodeId a, NodeId b, const char* what) const {
    const Shape& sa = nodes_[a].shape;
    const Shape& sb = nodes_[b].shape;
    if (sa == sb) return sa;
    if (numel(sa) == 1) return sb;
    if (numel(sb) == 1) return sa;
    throw Error(std::string(what) + ": shape mismatch " + shape_to_string(sa) + " vs " +
                shape_to_string(sb));
}

NodeId Graph::binary(Op op, NodeId a, NodeId b) {
    check_id(a, op_name(op));
    check_id(b, op_name(op));
    Node n;
    n.op = op;
    n.shape = binary_result_shape(a, b, op_name(op));
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) { return binary(Op::kAdd, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return binary(Op::kSub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return binary(Op::kMul, a, b); }
NodeId Graph::div(NodeId a, NodeId b) { return binary(Op::kDiv, a, b); }
NodeId Graph::max(NodeId a, NodeId b) { return binary(Op::kMax, a, b); }
NodeId Graph::ge_mask(NodeId a, NodeId b) { return binary(Op::kGeMask, a, b); }

NodeId Graph::matmul(NodeId a, NodeId b) {
    check_id(a, "matmul");
    check_id(b, "matmul");
    const Shape& sa = nodes_[a].shape;
    const Shape& sb = nodes_[b].shape;
    if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
        throw Error("matmul: incompatible shapes " + shape_to_string(sa) + " x " +
                    shape_to_string(sb));
    }
    Node n;
    n.op = Op::kMatmul;
    n.shape = {sa[0], sb[1]};
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

NodeId Graph::transpose(NodeId a) {
    check_id(a, "transpose");
    const Shape& sa = nodes_[a].shape;
    if (sa.size() != 2) throw Error("transpose: expected 2-D, got " + shape_to_string(sa));
    Node n;
    n.op = Op::kTranspose;
    n.shape = {sa[1], sa[0]};
    n.a = a;
    return push(std::move(n));
}

#define JACSHIELD_UNARY(NAME, OP)                 \
    NodeId Graph::NAME(NodeId a) {                \
        check_id(a, op_name(OP));                 \
        Node n;                                   \
        n.op = OP;                                \
        n.shape = nodes_[a].shape;                \
        n.a = a;                                  \
        return push(std::move(n));                \
    }

JACSHIELD_UNARY(relu, Op::kRelu)
JACSHIELD_UNARY(tanh, Op::kTanh)
JACSHIELD_UNARY(exp, Op::kExp)
JACSHIELD_UNARY(log, Op::kLog)
JACSHIELD_UNARY(sqrt, Op::kSqrt)
JACSHIELD_UNARY(relu_mask, Op::kReluMask)
JACSHIELD_UNARY(softmax, Op::kSoftmax)
#undef JACSHIELD_UNARY

NodeId Graph::sum(NodeId a) {
    check_id(a, "sum");
    Node n;
    n.op = Op::kSum;
    n.shape = {1};
    n.a = a;
    return push(std::move(n));
}

NodeId Graph::broadcast(NodeId scalar, Shape target) {
    check_id(scalar, "broadcast");
    if (numel(nodes_[scalar].shape) != 1) {
        throw Error("broadcast: source must be scalar, got " +
                    shape_to_string(nodes_[scalar].shape));
    }
    Node n;
    n.op = Op::kBroadcast;
    n.shape = std::move(target);
    n.a = scalar;
    return push(std::move(n));
}

NodeId Graph::reshape(NodeId a, Shape target) {
    check_id(a, "reshape");
    if (numel(target) != numel(nodes_[a].shape)) {
        throw Error("reshape: element count mismatch " + shape_to_string(nodes_[a].shape) +
                    " -> " + shape_to_string(target));
    }
    if (nodes_[a].shape == target) return a;
    Node n;
    n.op = Op::kReshape;
    n.shape = std::move(target);
    n.a = a;
    return push(std::move(n));
}

std::int32_t Graph::intern_indices(std::vector<std::uint32_t> indices) {
    index_sets_.push_back(std::move(indices));
    return static_cast<std::int32_t>(index_sets_.size() - 1);
}

NodeId Graph::gather(NodeId a, std::vector<std::uint32_t> indices) {
    return gather(a, intern_indices(std::move(indices)));
}

NodeId Graph::gather(NodeId a, std::int32_t interned) {
    check_id(a, "gather");
    const auto& idx = index_sets_.at(interned);
    if (idx.empty()) throw Error("gather: empty index set");
    std::size_t limit = numel(nodes_[a].shape);
    for (std::uint32_t i : idx) {
        if (i >= limit) throw Error("gather: index out of range");
    }
    Node n;
    n.op = Op::kGather;
    n.shape = {idx.size()};
    n.a = a;
    n.iset = interned;
    return push(std::move(n));
}

NodeId Graph::scatter_add(NodeId a, std::vector<std::uint32_t> indices, Shape out_shape) {
    std::int32_t id = intern_indices(std::move(indices));
    return scatter_add_interned(a, id, std::move(out_shape));
}

NodeId Graph::scatter_add_interned(NodeId a, std::int32_t interned, Shape out_shape) {
    check_id(a, "scatter_add");
    const auto& idx = index_sets_.at(interned);
    if (idx.size() != numel(nodes_[a].shape)) {
        throw Error("scatter_add: index count does not match source size");
    }
    std::size_t limit = numel(out_shape);
    for (std::uint32_t i : idx) {
        if (i >= limit) throw Error("scatter_add: index out of range");
    }
    Node n;
    n.op = Op::kScatterAdd;
    n.shape = std::move(out_shape);
    n.a = a;
    n.iset = interned;
    return push(std::move(n));
}

NodeId Graph::softmax_xent(NodeId logits, NodeId target) {
    check_id(logits, "softmax_xent");
    check_id(target, "softmax_xent");
    if (numel(nodes_[logits].shape) != numel(nodes_[target].shape)) {
        throw Error("softmax_xent: logits/target size mismatch");
    }
    Node n;
    n.op = Op::kSoftmaxXent;
    n.shape = {1};
    n.a = logits;
    n.b = target;
    return push(std::move(n));
}

NodeId Graph::slice(NodeId a, std::size_t offset, std::size_t length) {
    check_id(a, "slice");
    std::size_t limit = numel(nodes_[a].shape);
    if (offset + length > limit || length == 0) throw Error("slice: range out of bounds");
    std::vector<std::uint32_t> idx(length);
    for (std::size_t i = 0; i < length; ++i) idx[i] = static_cast<std::uint32_t>(offset + i);
    return gather(a, std::move(idx));
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

namespace {

void stable_softmax(std::span<const double> z, std::vector<double>& out) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double denom = 0.0;
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
}

double log_sum_exp(std::span<const double> z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

std::vector<Tensor> Graph::evaluate(std::span<const NodeId> outputs) const {
    for (NodeId id : outputs) check_id(id, "evaluate");
    if (outputs.empty()) return {};

    const std::size_t n = nodes_.size();
    std::vector<char> needed(n, 0);
    std::vector<NodeId> stack(outputs.begin(), outputs.end());
    NodeId max_needed = 0;
    while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        if (needed[id]) continue;
        needed[id] = 1;
        max_needed = std::max(max_needed, id);
        const Node& nd = nodes_[id];
        if (nd.a != kNoNode) stack.push_back(nd.a);
        if (nd.b != kNoNode) stack.push_back(nd.b);
    }

    // consumer counts drive eager freeing of intermediates
    std::vector<std::uint32_t> pending(max_needed + 1, 0);
    for (NodeId id = 0; id <= max_needed; ++id) {
        if (!needed[id]) continue;
        const Node& nd = nodes_[id];
        if (nd.a != kNoNode) ++pending[nd.a];
        if (nd.b != kNoNode) ++pending[nd.b];
    }
    for (NodeId id : outputs) ++pending[id];

    std::vector<Tensor> computed(max_needed + 1);
    auto value_of = [&](NodeId id) -> const Tensor& {
        const Node& nd = nodes_[id];
        if (is_value_node(nd.op)) {
            if (!payload_bound_[nd.payload]) {
                throw Error("evaluate: unbound leaf node " + std::to_string(id));
            }
            return payloads_[nd.payload];
        }
        return computed[id];
    };
    auto release = [&](NodeId id) {
        if (id == kNoNode) return;
        if (--pending[id] == 0 && !is_value_node(nodes_[id].op)) {
            computed[id] = Tensor{};
        }
    };

    for (NodeId id = 0; id <= max_needed; ++id) {
        if (!needed[id]) continue;
        const Node& nd = nodes_[id];
        if (is_value_node(nd.op)) {
            if (!payload_bound_[nd.payload]) {
                throw Error("evaluate: unbound leaf node " + std::to_string(id));
            }
            continue;
        }

        Tensor out = Tensor::zeros(nd.shape);
        switch (nd.op) {
            case Op::kAdd:
            case Op::kSub:
            case Op::kMul:
            case Op::kDiv:
            case Op::kMax:
            case Op::kGeMask: {
                const Tensor& ta = value_of(nd.a);
                const Tensor& tb = value_of(nd.b);
                const std::size_t sz = out.size();
                const bool a_scalar = ta.size() == 1;
                const bool b_scalar = tb.size() == 1;
                for (std::size_t i = 0; i < sz; ++i) {
                    double x = ta[a_scalar ? 0 : i];
                    double y = tb[b_scalar ? 0 : i];
                    double v = 0.0;
                    switch (nd.op) {
                        case Op::kAdd: v = x + y; break;
                        case Op::kSub: v = x - y; break;
                        case Op::kMul: v = x * y; break;
                        case Op::kDiv: v = x / y; break;
                        case Op::kMax: v = x >= y ? x : y; break;
                        case Op::kGeMask: v = x >= y ? 1.0 : 0.0; break;
                        default: break;
                    }
                    out[i] = v;
                }
                break;
            }
            case Op::kMatmul: {
                const Tensor& ta = value_of(nd.a);
                const Tensor& tb = value_of(nd.b);
                const std::size_t m = ta.shape[0], k = ta.shape[1], p = tb.shape[1];
                for (std::size_t i = 0; i < m; ++i) {
                    const double* arow = ta.data.data() + i * k;
                    double* orow = out.data.data() + i * p;
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const double av = arow[kk];
                        const double* brow = tb.data.data() + kk * p;
                        for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
                    }
                }
                break;
            }
            case Op::kTranspose: {
                const Tensor& ta = value_of(nd.a);
                const std::size_t r = ta.shape[0], c = ta.shape[1];
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = ta[i * c + j];
                break;
            }
            case Op::kRelu: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = ta[i] > 0.0 ? ta[i] : 0.0;
                break;
            }
            case Op::kReluMask: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = ta[i] > 0.0 ? 1.0 : 0.0;
                break;
            }
            case Op::kTanh: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(ta[i]);
                break;
            }
            case Op::kExp: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(ta[i]);
                break;
            }
            case Op::kLog: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(ta[i]);
                break;
            }
            case Op::kSqrt: {
                const Tensor& ta = value_of(nd.a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(ta[i]);
                break;
            }
            case Op::kSum: {
                const Tensor& ta = value_of(nd.a);
                double s = 0.0;
                for (double v : ta.data) s += v;
                out[0] = s;
                break;
            }
            case Op::kBroadcast: {
                const double v = value_of(nd.a)[0];
                std::fill(out.data.begin(), out.data.end(), v);
                break;
            }
            case Op::kReshape: {
                out.data = value_of(nd.a).data;
                break;
            }
            case Op::kGather: {
                const Tensor& ta = value_of(nd.a);
                const auto& idx = index_sets_[nd.iset];
                for (std::size_t i = 0; i < idx.size(); ++i) out[i] = ta[idx[i]];
                break;
            }
            case Op::kScatterAdd: {
                const Tensor& ta = value_of(nd.a);
                const auto& idx = index_sets_[nd.iset];
                for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] += ta[i];
                break;
            }
            case Op::kSoftmax: {
                const Tensor& ta = value_of(nd.a);
                stable_softmax(ta.data, out.data);
                break;
            }
            case Op::kSoftmaxXent: {
                const Tensor& tz = value_of(nd.a);
                const Tensor& ty = value_of(nd.b);
                double lse = log_sum_exp(tz.data);
                double ysum = 0.0, zy = 0.0;
                for (std::size_t i = 0; i < ty.size(); ++i) {
                    ysum += ty[i];
                    zy += tz[i] * ty[i];
                }
                out[0] = lse * ysum - zy;
                break;
            }
            case Op::kLeaf:
            case Op::kConst:
                break;
        }

        if (!out.all_finite()) {
            throw NumericError(std::string("evaluate: non-finite result in ") + op_name(nd.op) +
                               " node " + std::to_string(id));
        }
        computed[id] = std::move(out);
        release(nd.a);
        release(nd.b);
    }

    std::vector<Tensor> result;
    result.reserve(outputs.size());
    for (NodeId id : outputs) result.push_back(value_of(id));
    return result;
}

Tensor Graph::evaluate_one(NodeId output) const {
    NodeId ids[1] = {output};
    return std::move(evaluate(ids)[0]);
}

// ---------------------------------------------------------------------------
// differentiation
// ---------------------------------------------------------------------------

void Graph::accumulate(std::vector<NodeId>& adj, const std::vector<char>& needed,
                       NodeId operand, NodeId contrib, NodeId /*out*/) {
    if (operand == kNoNode) return;
    if (operand >= needed.size() || !needed[operand]) return;
    const Shape& target = nodes_[operand].shape;
    const Shape& got = nodes_[contrib].shape;
    if (got != target) {
        if (numel(target) == 1 && numel(got) > 1) {
            contrib = sum(contrib);
        }
        if (nodes_[contrib].shape != target) contrib = reshape(contrib, target);
    }
    adj[operand] = (adj[operand] == kNoNode) ? contrib : add(adj[operand], contrib);
}

void Graph::emit_vjp(NodeId id, NodeId g, std::vector<NodeId>& adj,
                     const std::vector<char>& needed) {
    const Node nd = nodes_[id];  // copy: emission reallocates nodes_
    switch (nd.op) {
        case Op::kLeaf:
        case Op::kConst:
        case Op::kReluMask:
        case Op::kGeMask:
            return;
        case Op::kAdd:
            accumulate(adj, needed, nd.a, g, id);
            accumulate(adj, needed, nd.b, g, id);
            return;
        case Op::kSub:
            accumulate(adj, needed, nd.a, g, id);
            accumulate(adj, needed, nd.b, neg(g), id);
            return;
        case Op::kMul:
            if (needed[nd.a]) accumulate(adj, needed, nd.a, mul(g, nd.b), id);
            if (needed[nd.b]) accumulate(adj, needed, nd.b, mul(g, nd.a), id);
            return;
        case Op::kDiv:
            if (needed[nd.a]) accumulate(adj, needed, nd.a, div(g, nd.b), id);
            if (needed[nd.b]) {
                accumulate(adj, needed, nd.b, neg(div(mul(g, nd.a), mul(nd.b, nd.b))), id);
            }
            return;
        case Op::kMax: {
            if (!needed[nd.a] && !needed[nd.b]) return;
            NodeId m = ge_mask(nd.a, nd.b);  // ties go to the first operand
            if (needed[nd.a]) accumulate(adj, needed, nd.a, mul(g, m), id);
            if (needed[nd.b]) {
                accumulate(adj, needed, nd.b, mul(g, sub(scalar_const(1.0), m)), id);
            }
            return;
        }
        case Op::kMatmul:
            if (needed[nd.a]) accumulate(adj, needed, nd.a, matmul(g, transpose(nd.b)), id);
            if (needed[nd.b]) accumulate(adj, needed, nd.b, matmul(transpose(nd.a), g), id);
            return;
        case Op::kTranspose:
            accumulate(adj, needed, nd.a, transpose(g), id);
            return;
        case Op::kRelu:
            accumulate(adj, needed, nd.a, mul(g, relu_mask(nd.a)), id);
            return;
        case Op::kTanh:
            accumulate(adj, needed, nd.a, mul(g, sub(scalar_const(1.0), square(id))), id);
            return;
        case Op::kExp:
            accumulate(adj, needed, nd.a, mul(g, id), id);
            return;
        case Op::kLog:
            accumulate(adj, needed, nd.a, div(g, nd.a), id);
            return;
        case Op::kSqrt:
            accumulate(adj, needed, nd.a, div(g, scale(id, 2.0)), id);
            return;
        case Op::kSum:
            accumulate(adj, needed, nd.a, broadcast(g, nodes_[nd.a].shape), id);
            return;
        case Op::kBroadcast:
            accumulate(adj, needed, nd.a, sum(g), id);
            return;
        case Op::kReshape:
            accumulate(adj, needed, nd.a, reshape(g, nodes_[nd.a].shape), id);
            return;
        case Op::kGather:
            accumulate(adj, needed, nd.a,
                       scatter_add_interned(g, nd.iset, nodes_[nd.a].shape), id);
            return;
        case Op::kScatterAdd:
            accumulate(adj, needed, nd.a, gather(g, nd.iset), id);
            return;
        case Op::kSoftmax:
            // J^T g = s * (g - <g, s>)
            accumulate(adj, needed, nd.a, mul(id, sub(g, dot(g, id))), id);
            return;
        case Op::kSoftmaxXent: {
            // d/dz [lse(z)*sum(y) - z.y] = softmax(z)*sum(y) - y
            if (needed[nd.a]) {
                NodeId s = softmax(nd.a);
                accumulate(adj, needed, nd.a, mul(g, sub(mul(s, sum(nd.b)), nd.b)), id);
            }
            // d/dy_j = lse(z) - z_j, with lse recovered as (out + z.y)/sum(y)
            if (needed[nd.b]) {
                NodeId lse = div(add(id, dot(nd.a, nd.b)), sum(nd.b));
                accumulate(adj, needed, nd.b, mul(g, sub(lse, nd.a)), id);
            }
            return;
        }
    }
}

std::vector<NodeId> Graph::gradient(NodeId scalar, std::span<const NodeId> wrt) {
    check_id(scalar, "gradient");
    for (NodeId id : wrt) check_id(id, "gradient");
    if (numel(nodes_[scalar].shape) != 1) {
        throw Error("gradient: target must be scalar, got shape " +
                    shape_to_string(nodes_[scalar].shape));
    }

    const std::size_t n = nodes_.size();
    std::vector<char> needed(n, 0);
    for (NodeId id : wrt) needed[id] = 1;
    for (NodeId id = 0; id < n; ++id) {
        if (needed[id]) continue;
        const Node& nd = nodes_[id];
        if ((nd.a != kNoNode && needed[nd.a]) || (nd.b != kNoNode && needed[nd.b])) {
            needed[id] = 1;
        }
    }

    std::vector<NodeId> adj(n, kNoNode);
    if (needed[scalar]) {
        adj[scalar] = scalar_const(1.0);
        for (NodeId id = scalar + 1; id-- > 0;) {
            if (adj[id] == kNoNode || !needed[id]) continue;
            emit_vjp(id, adj[id], adj, needed);
        }
    }

    std::vector<NodeId> result;
    result.reserve(wrt.size());
    for (NodeId w : wrt) {
        if (adj[w] != kNoNode) {
            result.push_back(reshape(adj[w], nodes_[w].shape));
        } else {
            result.push_back(constant(Tensor::zeros(nodes_[w].shape)));
        }
    }
    return result;
}

NodeId Graph::gradient_one(NodeId scalar, NodeId wrt) {
    NodeId ids[1] = {wrt};
    return gradient(scalar, ids)[0];
}

GradCheckReport Graph::check_gradient(NodeId scalar, NodeId wrt_leaf, double step, double tol) {
    if (step <= 0.0) throw Error("check_gradient: step must be positive");
    check_id(wrt_leaf, "check_gradient");
    if (nodes_[wrt_leaf].op != Op::kLeaf || !is_bound(wrt_leaf)) {
        throw Error("check_gradient: wrt must be a bound leaf");
    }

    NodeId grad_node = gradient_one(scalar, wrt_leaf);
    Tensor analytic = evaluate_one(grad_node);

    Tensor saved = bound_value(wrt_leaf);
    GradCheckReport report;
    for (std::size_t i = 0; i < saved.size(); ++i) {
        Tensor probe = saved;
        probe[i] = saved[i] + step;
        bind(wrt_leaf, probe);
        double f_plus = evaluate_one(scalar)[0];
        probe[i] = saved[i] - step;
        bind(wrt_leaf, probe);
        double f_minus = evaluate_one(scalar)[0];
        double fd = (f_plus - f_minus) / (2.0 * step);
        double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
        report.max_rel_err = std::max(report.max_rel_err, std::abs(fd - analytic[i]) / denom);
    }
    bind(wrt_leaf, saved);
    report.pass = report.max_rel_err <= tol;
    return report;
}

}  // namespace jacshield
