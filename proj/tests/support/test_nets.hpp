#ifndef JACSHIELD_TESTS_TEST_NETS_HPP
#define JACSHIELD_TESTS_TEST_NETS_HPP

#include <vector>

#include "jacshield/network.hpp"

namespace jacshield::testing {

// Single dense layer whose input Jacobian equals `rows` (K x D) exactly;
// the stored weight matrix is its transpose.
inline Network linear_net_from_rows(const std::vector<std::vector<double>>& rows,
                                    std::vector<double> bias = {}) {
    std::size_t k = rows.size();
    std::size_t d = rows[0].size();
    Network net = make_network({LayerSpec::dense(d, k)}, {d}, /*seed=*/1);
    Tensor w = Tensor::zeros({d, k});
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < d; ++c) w.data[c * k + r] = rows[r][c];
    net.weights.back() = std::move(w);
    if (!bias.empty()) net.biases.back() = Tensor::from_vector(std::move(bias));
    return net;
}

inline Network small_relu_net(std::uint64_t seed, std::size_t d = 6, std::size_t classes = 3) {
    return make_network({LayerSpec::dense(d, 8), LayerSpec::relu(), LayerSpec::dense(8, 5),
                         LayerSpec::relu(), LayerSpec::dense(5, classes)},
                        {d}, seed);
}

inline Tensor random_input(Rng& rng, const Shape& shape, double lo = 0.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    for (auto& v : t.data) v = lo + (hi - lo) * rng.uniform();
    return t;
}

}  // namespace jacshield::testing

#endif
