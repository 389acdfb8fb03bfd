#ifndef JACSHIELD_NETWORK_HPP
#define JACSHIELD_NETWORK_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jacshield/autodiff.hpp"

namespace jacshield {

enum class Mode { kEval, kTrain };

enum class LayerKind : std::uint8_t {
    kDense = 0,
    kConv = 1,
    kMaxPool = 2,
    kRelu = 3,
    kDropout = 4,
    kTanh = 5,
};

struct LayerSpec {
    LayerKind kind = LayerKind::kDense;
    std::size_t in = 0, out = 0;                     // dense
    std::size_t kh = 0, kw = 0, in_ch = 0, out_ch = 0;  // conv
    double keep_prob = 1.0;                          // dropout
    bool frozen = false;

    static LayerSpec dense(std::size_t in, std::size_t out);
    static LayerSpec conv(std::size_t kh, std::size_t kw, std::size_t in_ch, std::size_t out_ch);
    static LayerSpec maxpool();
    static LayerSpec relu();
    static LayerSpec tanh();
    static LayerSpec dropout(double keep_prob);

    bool has_params() const { return kind == LayerKind::kDense || kind == LayerKind::kConv; }
};

// Feed-forward stack. Logits are the output of the last dense layer; no
// nonlinearity follows it (softmax lives in the loss).
struct Network {
    std::vector<LayerSpec> layers;
    std::vector<Tensor> weights;  // parallel to layers; empty for non-param layers
    std::vector<Tensor> biases;
    Shape input_shape;
    std::size_t output_dim = 0;
    std::uint64_t rng_seed = 0;

    std::size_t input_dim() const { return numel(input_shape); }
};

// Validates dimension composition and initializes weights (zero-mean
// Gaussian, variance 2/fan_in before relu and 1/fan_in otherwise; zero
// biases).
Network make_network(std::vector<LayerSpec> layers, Shape input_shape, std::uint64_t seed);

// Reference architectures.
Network tiny_mlp(std::size_t input_dim, std::size_t classes, std::uint64_t seed);
Network mnist_convnet(std::uint64_t seed);   // conv-pool x2, two dense, dropout 0.5
Network cifar_convnet(std::uint64_t seed);   // four conv-conv-pool-dropout blocks, two dense
Network desk_convnet(std::uint64_t seed);    // small conv net for desk-scale runs
Network make_architecture(const std::string& name, const Shape& input_shape,
                          std::size_t classes, std::uint64_t seed);

// ---- graph building --------------------------------------------------------

// Weight leaves plus per-layer cached gather maps for one Graph.
struct NetGraphRefs {
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;
    std::vector<std::int32_t> conv_iset;
    std::vector<NodeId> conv_ones;
    std::vector<std::array<std::int32_t, 4>> pool_iset;
};

NetGraphRefs bind_weights(Graph& g, const Network& net);

struct ForwardTaps {
    NodeId logits = kNoNode;
    NodeId tap_lm1 = kNoNode;  // input vector of the last dense layer
    NodeId tap_lm2 = kNoNode;  // input vector of the dense layer before it
    bool has_lm1 = false;
    bool has_lm2 = false;
};

// In train mode, dropout masks are drawn deterministically from
// (net.rng_seed, dropout_stream, layer index) and become constants of the
// graph, so every loss term built over these taps sees the same masks.
ForwardTaps build_forward(Graph& g, const Network& net, NetGraphRefs& refs, NodeId x, Mode mode,
                          std::uint64_t dropout_stream = 0);

// ---- value-level operations --------------------------------------------------

struct ForwardResult {
    Tensor logits;
    std::optional<Tensor> tap_lm1;
    std::optional<Tensor> tap_lm2;
};

ForwardResult forward(const Network& net, const Tensor& x, Mode mode = Mode::kEval,
                      std::uint64_t dropout_stream = 0);

enum class JacobianLayer : std::uint8_t { kL = 0, kLm1 = 1, kLm2 = 2 };

const char* jacobian_layer_name(JacobianLayer layer);

struct JacobianMatrix {
    Tensor matrix;  // [rows, input_dim], row k = d z_k / d x
    JacobianLayer layer = JacobianLayer::kL;

    std::size_t rows() const { return matrix.shape.at(0); }
    std::size_t cols() const { return matrix.shape.at(1); }
    std::span<const double> row(std::size_t k) const;
    double frobenius_sq() const;
    double frobenius() const;
};

JacobianMatrix jacobian(const Network& net, const Tensor& x,
                        JacobianLayer layer = JacobianLayer::kL, Mode mode = Mode::kEval,
                        std::uint64_t dropout_stream = 0);

std::size_t predict(const Network& net, const Tensor& x);

// Replaces the weight of a dense layer by a seeded matrix with
// orthonormal columns (QR of a Gaussian draw), zeroes its bias and marks
// it frozen. Requires in >= out.
Network freeze_orthonormal(Network net, std::size_t layer_index, std::uint64_t seed);

// Index of the n-th dense layer counting from the output (0 = last).
std::size_t dense_layer_from_output(const Network& net, std::size_t nth);

// ---- checkpoint format -------------------------------------------------------
// Versioned binary, magic "JSHD". Round-trips bit-exactly.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace jacshield

#endif
