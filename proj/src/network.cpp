#include "jacshield/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace jacshield {

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
    LayerSpec s;
    s.kind = LayerKind::kDense;
    s.in = in;
    s.out = out;
    return s;
}

LayerSpec LayerSpec::conv(std::size_t kh, std::size_t kw, std::size_t in_ch, std::size_t out_ch) {
    LayerSpec s;
    s.kind = LayerKind::kConv;
    s.kh = kh;
    s.kw = kw;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    return s;
}

LayerSpec LayerSpec::maxpool() {
    LayerSpec s;
    s.kind = LayerKind::kMaxPool;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::kRelu;
    return s;
}

LayerSpec LayerSpec::tanh() {
    LayerSpec s;
    s.kind = LayerKind::kTanh;
    return s;
}

LayerSpec LayerSpec::dropout(double keep_prob) {
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw Error("dropout: keep_prob must be in (0,1]");
    }
    LayerSpec s;
    s.kind = LayerKind::kDropout;
    s.keep_prob = keep_prob;
    return s;
}

namespace {

// Walks the layer stack and returns the activation shape after each
// layer; throws when adjacent dims do not compose.
std::vector<Shape> shape_walk(const std::vector<LayerSpec>& layers, const Shape& input_shape) {
    std::vector<Shape> shapes;
    Shape cur = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        switch (l.kind) {
            case LayerKind::kDense:
                if (numel(cur) != l.in) {
                    throw Error("layer " + std::to_string(i) + ": dense expects " +
                                std::to_string(l.in) + " inputs, got " +
                                std::to_string(numel(cur)));
                }
                cur = {l.out};
                break;
            case LayerKind::kConv: {
                if (cur.size() != 3 || cur[2] != l.in_ch || cur[0] < l.kh || cur[1] < l.kw) {
                    throw Error("layer " + std::to_string(i) + ": conv expects HxWx" +
                                std::to_string(l.in_ch) + " input >= kernel, got " +
                                shape_to_string(cur));
                }
                cur = {cur[0] - l.kh + 1, cur[1] - l.kw + 1, l.out_ch};
                break;
            }
            case LayerKind::kMaxPool:
                if (cur.size() != 3 || cur[0] % 2 != 0 || cur[1] % 2 != 0) {
                    throw Error("layer " + std::to_string(i) +
                                ": maxpool needs even HxWxC input, got " + shape_to_string(cur));
                }
                cur = {cur[0] / 2, cur[1] / 2, cur[2]};
                break;
            case LayerKind::kRelu:
            case LayerKind::kTanh:
            case LayerKind::kDropout:
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

}  // namespace

Network make_network(std::vector<LayerSpec> layers, Shape input_shape, std::uint64_t seed) {
    if (layers.empty()) throw Error("make_network: no layers");
    std::vector<Shape> shapes = shape_walk(layers, input_shape);
    if (layers.back().kind != LayerKind::kDense) {
        throw Error("make_network: last layer must be dense (logits)");
    }

    Network net;
    net.layers = std::move(layers);
    net.input_shape = std::move(input_shape);
    net.output_dim = net.layers.back().out;
    net.rng_seed = seed;
    net.weights.resize(net.layers.size());
    net.biases.resize(net.layers.size());

    Rng rng(mix_seed(seed, 0x1717));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        if (!l.has_params()) continue;
        // relu after this layer (before the next parametric one) selects
        // the 2/fan_in variant
        bool relu_next = false;
        for (std::size_t j = i + 1; j < net.layers.size() && !net.layers[j].has_params(); ++j) {
            if (net.layers[j].kind == LayerKind::kRelu) relu_next = true;
        }
        std::size_t fan_in = l.kind == LayerKind::kDense ? l.in : l.kh * l.kw * l.in_ch;
        double stddev = std::sqrt((relu_next ? 2.0 : 1.0) / static_cast<double>(fan_in));
        Shape wshape = l.kind == LayerKind::kDense ? Shape{l.in, l.out}
                                                   : Shape{l.kh, l.kw, l.in_ch, l.out_ch};
        Tensor w = Tensor::zeros(wshape);
        for (auto& v : w.data) v = stddev * rng.gaussian();
        net.weights[i] = std::move(w);
        net.biases[i] = Tensor::zeros({l.kind == LayerKind::kDense ? l.out : l.out_ch});
    }
    return net;
}

Network tiny_mlp(std::size_t input_dim, std::size_t classes, std::uint64_t seed) {
    return make_network(
        {LayerSpec::dense(input_dim, 32), LayerSpec::tanh(), LayerSpec::dense(32, classes)},
        {input_dim}, seed);
}

Network mnist_convnet(std::uint64_t seed) {
    // conv-pool x2 then two dense layers with dropout, valid padding
    // throughout: 28 -> 24 -> 12 -> 8 -> 4, so the flattened tap has
    // 4*4*64 = 1024 units.
    return make_network(
        {LayerSpec::conv(5, 5, 1, 32), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::conv(5, 5, 32, 64), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::dense(1024, 1024), LayerSpec::relu(), LayerSpec::dropout(0.5),
         LayerSpec::dense(1024, 10)},
        {28, 28, 1}, seed);
}

Network cifar_convnet(std::uint64_t seed) {
    return make_network(
        {
            LayerSpec::conv(3, 3, 3, 32), LayerSpec::relu(),
            LayerSpec::conv(3, 3, 32, 32), LayerSpec::relu(),
            LayerSpec::maxpool(), LayerSpec::dropout(0.75),
            LayerSpec::conv(2, 2, 32, 64), LayerSpec::relu(),
            LayerSpec::conv(2, 2, 64, 64), LayerSpec::relu(),
            LayerSpec::maxpool(), LayerSpec::dropout(0.75),
            LayerSpec::conv(2, 2, 64, 128), LayerSpec::relu(),
            LayerSpec::conv(2, 2, 128, 128), LayerSpec::relu(),
            LayerSpec::maxpool(), LayerSpec::dropout(0.75),
            LayerSpec::conv(1, 1, 128, 128), LayerSpec::relu(),
            LayerSpec::conv(1, 1, 128, 128), LayerSpec::relu(),
            LayerSpec::maxpool(), LayerSpec::dropout(0.75),
            LayerSpec::dense(128, 256), LayerSpec::relu(),
            LayerSpec::dense(256, 10),
        },
        {32, 32, 3}, seed);
}

Network desk_convnet(std::uint64_t seed) {
    return make_network(
        {LayerSpec::conv(5, 5, 1, 4), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::conv(5, 5, 4, 8), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::dense(128, 64), LayerSpec::relu(), LayerSpec::dropout(0.5),
         LayerSpec::dense(64, 10)},
        {28, 28, 1}, seed);
}

Network make_architecture(const std::string& name, const Shape& input_shape, std::size_t classes,
                          std::uint64_t seed) {
    if (name == "tiny-mlp") return tiny_mlp(numel(input_shape), classes, seed);
    if (name == "mnist-conv") return mnist_convnet(seed);
    if (name == "cifar-conv") return cifar_convnet(seed);
    if (name == "desk-conv") return desk_convnet(seed);
    throw ConfigError("unknown architecture '" + name + "'");
}

// ---------------------------------------------------------------------------
// graph building
// ---------------------------------------------------------------------------

NetGraphRefs bind_weights(Graph& g, const Network& net) {
    NetGraphRefs refs;
    refs.weights.assign(net.layers.size(), kNoNode);
    refs.biases.assign(net.layers.size(), kNoNode);
    refs.conv_iset.assign(net.layers.size(), -1);
    refs.conv_ones.assign(net.layers.size(), kNoNode);
    refs.pool_iset.assign(net.layers.size(), {-1, -1, -1, -1});
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].has_params()) continue;
        refs.weights[i] = g.input(net.weights[i].shape);
        refs.biases[i] = g.input(net.biases[i].shape);
        g.bind(refs.weights[i], net.weights[i]);
        g.bind(refs.biases[i], net.biases[i]);
    }
    return refs;
}

namespace {

std::vector<std::uint32_t> im2col_indices(std::size_t h, std::size_t w, std::size_t c,
                                          std::size_t kh, std::size_t kw) {
    std::size_t oh = h - kh + 1, ow = w - kw + 1;
    std::vector<std::uint32_t> idx;
    idx.reserve(oh * ow * kh * kw * c);
    for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox)
            for (std::size_t ky = 0; ky < kh; ++ky)
                for (std::size_t kx = 0; kx < kw; ++kx)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        idx.push_back(
                            static_cast<std::uint32_t>(((oy + ky) * w + (ox + kx)) * c + ch));
    return idx;
}

std::vector<std::uint32_t> pool_indices(std::size_t h, std::size_t w, std::size_t c,
                                        std::size_t dy, std::size_t dx) {
    std::vector<std::uint32_t> idx;
    idx.reserve((h / 2) * (w / 2) * c);
    for (std::size_t py = 0; py < h / 2; ++py)
        for (std::size_t px = 0; px < w / 2; ++px)
            for (std::size_t ch = 0; ch < c; ++ch)
                idx.push_back(
                    static_cast<std::uint32_t>(((2 * py + dy) * w + (2 * px + dx)) * c + ch));
    return idx;
}

Tensor draw_dropout_mask(const Shape& shape, double keep, std::uint64_t seed) {
    Tensor mask = Tensor::zeros(shape);
    Rng rng(seed);
    for (auto& v : mask.data) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mask;
}

}  // namespace

ForwardTaps build_forward(Graph& g, const Network& net, NetGraphRefs& refs, NodeId x, Mode mode,
                          std::uint64_t dropout_stream) {
    std::vector<Shape> shapes = shape_walk(net.layers, net.input_shape);
    if (numel(g.shape(x)) != net.input_dim()) {
        throw Error("forward: input has " + std::to_string(numel(g.shape(x))) +
                    " elements, network expects " + std::to_string(net.input_dim()));
    }
    NodeId cur = g.reshape(x, net.input_shape);
    Shape cur_shape = net.input_shape;
    std::vector<NodeId> dense_inputs;

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        switch (l.kind) {
            case LayerKind::kDense: {
                NodeId flat = g.reshape(cur, {1, numel(cur_shape)});
                dense_inputs.push_back(flat);
                cur = g.add(g.matmul(flat, refs.weights[i]),
                            g.reshape(refs.biases[i], {1, l.out}));
                break;
            }
            case LayerKind::kConv: {
                std::size_t h = cur_shape[0], w = cur_shape[1], c = cur_shape[2];
                std::size_t oh = h - l.kh + 1, ow = w - l.kw + 1;
                if (refs.conv_iset[i] < 0) {
                    refs.conv_iset[i] = g.intern_indices(im2col_indices(h, w, c, l.kh, l.kw));
                    refs.conv_ones[i] = g.constant(Tensor::full({oh * ow, 1}, 1.0));
                }
                NodeId cols = g.reshape(g.gather(g.reshape(cur, {numel(cur_shape)}),
                                                 refs.conv_iset[i]),
                                        {oh * ow, l.kh * l.kw * c});
                NodeId km = g.reshape(refs.weights[i], {l.kh * l.kw * c, l.out_ch});
                NodeId z = g.matmul(cols, km);
                NodeId bias_rows =
                    g.matmul(refs.conv_ones[i], g.reshape(refs.biases[i], {1, l.out_ch}));
                cur = g.reshape(g.add(z, bias_rows), {oh, ow, l.out_ch});
                break;
            }
            case LayerKind::kMaxPool: {
                std::size_t h = cur_shape[0], w = cur_shape[1], c = cur_shape[2];
                if (refs.pool_iset[i][0] < 0) {
                    for (std::size_t d = 0; d < 4; ++d) {
                        refs.pool_iset[i][d] =
                            g.intern_indices(pool_indices(h, w, c, d / 2, d % 2));
                    }
                }
                NodeId flat = g.reshape(cur, {numel(cur_shape)});
                NodeId m = g.max(g.max(g.gather(flat, refs.pool_iset[i][0]),
                                       g.gather(flat, refs.pool_iset[i][1])),
                                 g.max(g.gather(flat, refs.pool_iset[i][2]),
                                       g.gather(flat, refs.pool_iset[i][3])));
                cur = g.reshape(m, {h / 2, w / 2, c});
                break;
            }
            case LayerKind::kRelu:
                cur = g.relu(cur);
                break;
            case LayerKind::kTanh:
                cur = g.tanh(cur);
                break;
            case LayerKind::kDropout:
                if (mode == Mode::kTrain && l.keep_prob < 1.0) {
                    std::uint64_t seed =
                        mix_seed(mix_seed(net.rng_seed, dropout_stream), 0xD0 + i);
                    cur = g.mul(cur, g.constant(draw_dropout_mask(g.shape(cur), l.keep_prob,
                                                                  seed)));
                }
                break;
        }
        cur_shape = shapes[i];
    }

    ForwardTaps taps;
    taps.logits = g.reshape(cur, {net.output_dim});
    if (!dense_inputs.empty()) {
        taps.tap_lm1 = dense_inputs.back();
        taps.has_lm1 = true;
    }
    if (dense_inputs.size() >= 2) {
        taps.tap_lm2 = dense_inputs[dense_inputs.size() - 2];
        taps.has_lm2 = true;
    }
    return taps;
}

ForwardResult forward(const Network& net, const Tensor& x, Mode mode,
                      std::uint64_t dropout_stream) {
    Graph g;
    NetGraphRefs refs = bind_weights(g, net);
    NodeId xn = g.input(x.shape);
    g.bind(xn, x);
    ForwardTaps taps = build_forward(g, net, refs, xn, mode, dropout_stream);

    std::vector<NodeId> outs{taps.logits};
    if (taps.has_lm1) outs.push_back(taps.tap_lm1);
    if (taps.has_lm2) outs.push_back(taps.tap_lm2);
    auto vals = g.evaluate(outs);

    ForwardResult r;
    r.logits = std::move(vals[0]);
    std::size_t k = 1;
    if (taps.has_lm1) r.tap_lm1 = std::move(vals[k++]);
    if (taps.has_lm2) r.tap_lm2 = std::move(vals[k++]);
    return r;
}

const char* jacobian_layer_name(JacobianLayer layer) {
    switch (layer) {
        case JacobianLayer::kL: return "L";
        case JacobianLayer::kLm1: return "L-1";
        case JacobianLayer::kLm2: return "L-2";
    }
    return "?";
}

std::span<const double> JacobianMatrix::row(std::size_t k) const {
    return std::span<const double>(matrix.data.data() + k * cols(), cols());
}

double JacobianMatrix::frobenius_sq() const {
    double s = 0.0;
    for (double v : matrix.data) s += v * v;
    return s;
}

double JacobianMatrix::frobenius() const { return std::sqrt(frobenius_sq()); }

JacobianMatrix jacobian(const Network& net, const Tensor& x, JacobianLayer layer, Mode mode,
                        std::uint64_t dropout_stream) {
    Graph g;
    NetGraphRefs refs = bind_weights(g, net);
    NodeId xn = g.input(x.shape);
    g.bind(xn, x);
    ForwardTaps taps = build_forward(g, net, refs, xn, mode, dropout_stream);

    NodeId target = kNoNode;
    switch (layer) {
        case JacobianLayer::kL: target = taps.logits; break;
        case JacobianLayer::kLm1: target = taps.has_lm1 ? taps.tap_lm1 : kNoNode; break;
        case JacobianLayer::kLm2: target = taps.has_lm2 ? taps.tap_lm2 : kNoNode; break;
    }
    if (target == kNoNode) {
        throw Error(std::string("jacobian: layer ") + jacobian_layer_name(layer) +
                    " is not available for this architecture");
    }

    std::size_t rows = numel(g.shape(target));
    std::size_t cols = net.input_dim();
    std::vector<NodeId> row_nodes;
    row_nodes.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        row_nodes.push_back(g.gradient_one(g.slice(target, r, 1), xn));
    }
    auto vals = g.evaluate(row_nodes);

    JacobianMatrix jm;
    jm.layer = layer;
    jm.matrix = Tensor::zeros({rows, cols});
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy(vals[r].data.begin(), vals[r].data.end(), jm.matrix.data.begin() + r * cols);
    }
    return jm;
}

std::size_t predict(const Network& net, const Tensor& x) {
    Tensor logits = forward(net, x, Mode::kEval).logits;
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;  // ties keep the lowest index
    }
    return best;
}

Network freeze_orthonormal(Network net, std::size_t layer_index, std::uint64_t seed) {
    if (layer_index >= net.layers.size() || net.layers[layer_index].kind != LayerKind::kDense) {
        throw Error("freeze_orthonormal: layer " + std::to_string(layer_index) +
                    " is not a dense layer");
    }
    LayerSpec& l = net.layers[layer_index];
    if (l.in < l.out) {
        throw Error("freeze_orthonormal: need in >= out for orthonormal columns, got " +
                    std::to_string(l.in) + " < " + std::to_string(l.out));
    }

    // modified Gram-Schmidt on the columns of a Gaussian draw
    std::size_t m = l.in, k = l.out;
    Rng rng(mix_seed(seed, 0x0412));
    std::vector<std::vector<double>> cols(k, std::vector<double>(m));
    for (auto& col : cols)
        for (auto& v : col) v = rng.gaussian();
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t p = 0; p < j; ++p) {
            double proj = dot(cols[j], cols[p]);
            for (std::size_t i = 0; i < m; ++i) cols[j][i] -= proj * cols[p][i];
        }
        double nrm = l2_norm(cols[j]);
        if (nrm < 1e-12) throw Error("freeze_orthonormal: degenerate draw");
        for (auto& v : cols[j]) v /= nrm;
    }

    Tensor w = Tensor::zeros({m, k});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) w.data[i * k + j] = cols[j][i];
    net.weights[layer_index] = std::move(w);
    net.biases[layer_index] = Tensor::zeros({k});
    l.frozen = true;
    return net;
}

std::size_t dense_layer_from_output(const Network& net, std::size_t nth) {
    std::size_t seen = 0;
    for (std::size_t i = net.layers.size(); i-- > 0;) {
        if (net.layers[i].kind == LayerKind::kDense) {
            if (seen == nth) return i;
            ++seen;
        }
    }
    throw Error("dense_layer_from_output: network has no dense layer " + std::to_string(nth) +
                " from the output");
}

// ---------------------------------------------------------------------------
// checkpoint io
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'J', 'S', 'H', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError(std::string("checkpoint: truncated while reading ") + what);
    return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is) {
    auto ndim = read_pod<std::uint32_t>(is, "tensor rank");
    Shape shape(ndim);
    for (auto& d : shape) d = read_pod<std::uint32_t>(is, "tensor dim");
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw IoError("checkpoint: truncated tensor payload");
    return t;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, net.rng_seed);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.input_shape.size()));
    for (std::size_t d : net.input_shape) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    }
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.output_dim));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers.size()));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(l.kind));
        write_pod<std::uint8_t>(os, l.frozen ? 1 : 0);
        switch (l.kind) {
            case LayerKind::kDense:
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.in));
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.out));
                break;
            case LayerKind::kConv:
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.kh));
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.kw));
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.in_ch));
                write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.out_ch));
                break;
            case LayerKind::kDropout:
                write_pod<double>(os, l.keep_prob);
                break;
            default:
                break;
        }
        if (l.has_params()) {
            write_tensor(os, net.weights[i]);
            write_tensor(os, net.biases[i]);
        }
    }
    if (!os) throw IoError("checkpoint: write failed for '" + path + "'");
}

Network load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("checkpoint: bad magic at offset 0 in '" + path + "'");
    }
    auto version = read_pod<std::uint32_t>(is, "version");
    if (version != kVersion) {
        throw IoError("checkpoint: unsupported format version " + std::to_string(version));
    }

    Network net;
    net.rng_seed = read_pod<std::uint64_t>(is, "seed");
    auto ndim = read_pod<std::uint32_t>(is, "input rank");
    net.input_shape.resize(ndim);
    for (auto& d : net.input_shape) d = read_pod<std::uint32_t>(is, "input dim");
    net.output_dim = read_pod<std::uint32_t>(is, "output dim");
    auto n_layers = read_pod<std::uint32_t>(is, "layer count");
    net.layers.resize(n_layers);
    net.weights.resize(n_layers);
    net.biases.resize(n_layers);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec l;
        auto kind = read_pod<std::uint8_t>(is, "layer kind");
        if (kind > static_cast<std::uint8_t>(LayerKind::kTanh)) {
            throw IoError("checkpoint: unknown layer kind tag " + std::to_string(kind));
        }
        l.kind = static_cast<LayerKind>(kind);
        l.frozen = read_pod<std::uint8_t>(is, "frozen flag") != 0;
        switch (l.kind) {
            case LayerKind::kDense:
                l.in = read_pod<std::uint32_t>(is, "dense in");
                l.out = read_pod<std::uint32_t>(is, "dense out");
                break;
            case LayerKind::kConv:
                l.kh = read_pod<std::uint32_t>(is, "conv kh");
                l.kw = read_pod<std::uint32_t>(is, "conv kw");
                l.in_ch = read_pod<std::uint32_t>(is, "conv in_ch");
                l.out_ch = read_pod<std::uint32_t>(is, "conv out_ch");
                break;
            case LayerKind::kDropout:
                l.keep_prob = read_pod<double>(is, "keep_prob");
                break;
            default:
                break;
        }
        if (l.has_params()) {
            net.weights[i] = read_tensor(is);
            net.biases[i] = read_tensor(is);
        }
        net.layers[i] = l;
    }
    // dimension sanity; throws on corrupted files
    shape_walk(net.layers, net.input_shape);
    return net;
}

}  // namespace jacshield
