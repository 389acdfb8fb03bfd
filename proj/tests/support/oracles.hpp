#ifndef JACSHIELD_TESTS_ORACLES_HPP
#define JACSHIELD_TESTS_ORACLES_HPP

// Test-only oracles. Everything here is independent of the library's
// gradient path: plain finite differences and a hand-rolled softmax
// regression used as a learnability reference.

#include <cmath>
#include <functional>
#include <vector>

#include "jacshield/common.hpp"
#include "jacshield/tensor.hpp"

namespace jacshield::testing {

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> point, double h = 1e-5) {
    std::vector<double> grad(point.size(), 0.0);
    for (std::size_t i = 0; i < point.size(); ++i) {
        double saved = point[i];
        point[i] = saved + h;
        double fp = f(point);
        point[i] = saved - h;
        double fm = f(point);
        point[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Plain full-batch softmax regression on flat inputs; gradient descent,
// no regularization. Used as a "this dataset is learnable" reference.
struct LogisticOracle {
    std::vector<std::vector<double>> weights;  // [K][D]
    std::vector<double> bias;                  // [K]

    static LogisticOracle fit(const std::vector<std::vector<double>>& xs,
                              const std::vector<std::size_t>& ys, std::size_t k,
                              std::size_t steps = 400, double rate = 0.5) {
        std::size_t d = xs[0].size();
        LogisticOracle m;
        m.weights.assign(k, std::vector<double>(d, 0.0));
        m.bias.assign(k, 0.0);
        std::vector<double> logits(k), probs(k);
        std::vector<std::vector<double>> gw(k, std::vector<double>(d));
        std::vector<double> gb(k);
        for (std::size_t step = 0; step < steps; ++step) {
            for (auto& row : gw) std::fill(row.begin(), row.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                for (std::size_t c = 0; c < k; ++c) {
                    logits[c] = m.bias[c];
                    for (std::size_t j = 0; j < d; ++j) logits[c] += m.weights[c][j] * xs[i][j];
                }
                double mx = logits[0];
                for (double v : logits) mx = std::max(mx, v);
                double denom = 0.0;
                for (std::size_t c = 0; c < k; ++c) {
                    probs[c] = std::exp(logits[c] - mx);
                    denom += probs[c];
                }
                for (std::size_t c = 0; c < k; ++c) {
                    double delta = probs[c] / denom - (c == ys[i] ? 1.0 : 0.0);
                    for (std::size_t j = 0; j < d; ++j) gw[c][j] += delta * xs[i][j];
                    gb[c] += delta;
                }
            }
            double scale = rate / static_cast<double>(xs.size());
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t j = 0; j < d; ++j) m.weights[c][j] -= scale * gw[c][j];
                m.bias[c] -= scale * gb[c];
            }
        }
        return m;
    }

    std::size_t predict(const std::vector<double>& x) const {
        std::size_t best = 0;
        double best_v = -1e300;
        for (std::size_t c = 0; c < weights.size(); ++c) {
            double v = bias[c];
            for (std::size_t j = 0; j < x.size(); ++j) v += weights[c][j] * x[j];
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        return best;
    }

    double accuracy(const std::vector<std::vector<double>>& xs,
                    const std::vector<std::size_t>& ys) const {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (predict(xs[i]) == ys[i]) ++hit;
        }
        return static_cast<double>(hit) / static_cast<double>(xs.size());
    }
};

}  // namespace jacshield::testing

#endif
