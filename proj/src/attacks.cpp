#include "jacshield/attacks.hpp"

#include <algorithm>
#include <cmath>

namespace jacshield {

const char* attack_kind_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::kFgsm: return "fgsm";
        case AttackKind::kDeepFool: return "deepfool";
        case AttackKind::kJsma: return "jsma";
    }
    return "?";
}

void AttackConfig::validate() const {
    if (!(clip_min < clip_max)) throw ConfigError("attack: clip_min must be < clip_max");
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw ConfigError("attack: epsilon must be finite and >= 0");
    }
    if (max_iter < 1) throw ConfigError("attack: max_iter must be >= 1");
    if (epochs < 1) throw ConfigError("attack: epochs must be >= 1");
    if (pixels_per_epoch < 1) throw ConfigError("attack: pixels_per_epoch must be >= 1");
    if (overshoot < 0.0) throw ConfigError("attack: overshoot must be >= 0");
}

PerturbationNorms perturbation_norms(const Tensor& x, const Tensor& x_pert) {
    Tensor d = x_pert - x;
    PerturbationNorms n;
    n.l0 = d.l0_norm();
    n.l2 = d.l2_norm();
    n.linf = d.linf_norm();
    return n;
}

namespace {

void clip_inplace(Tensor& t, double lo, double hi) {
    for (double& v : t.data) v = std::clamp(v, lo, hi);
}

std::size_t argmax_logits(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;
    }
    return best;
}

// d CE(f(x), label) / d x, eval mode
Tensor input_loss_gradient(const Network& net, const Tensor& x, const Label& label) {
    Graph g;
    NetGraphRefs refs = bind_weights(g, net);
    NodeId xn = g.input(x.shape);
    g.bind(xn, x);
    ForwardTaps taps = build_forward(g, net, refs, xn, Mode::kEval);
    NodeId ce = cross_entropy(g, taps.logits, label, net.output_dim);
    return g.evaluate_one(g.gradient_one(ce, xn));
}

AttackOutcome finish(const Network& net, const Tensor& x, Tensor x_pert,
                     std::size_t reference_class, std::size_t original_prediction,
                     int iterations) {
    AttackOutcome out;
    out.final_prediction = predict(net, x_pert);
    out.success = out.final_prediction != reference_class;
    out.norms = perturbation_norms(x, x_pert);
    out.x_pert = std::move(x_pert);
    out.original_prediction = original_prediction;
    out.iterations = iterations;
    return out;
}

}  // namespace

AttackOutcome fgsm(const Network& net, const Tensor& x, const Label& label,
                   const AttackConfig& cfg) {
    cfg.validate();
    Tensor grad = input_loss_gradient(net, x, label);
    double direction = cfg.sign_convention == SignConvention::kAscent ? 1.0 : -1.0;
    Tensor x_pert = x;
    for (std::size_t i = 0; i < x_pert.size(); ++i) {
        double s = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
        x_pert[i] += direction * cfg.epsilon * s;
    }
    clip_inplace(x_pert, cfg.clip_min, cfg.clip_max);
    return finish(net, x, std::move(x_pert), label.index, predict(net, x), 1);
}

AttackOutcome deepfool(const Network& net, const Tensor& x, const AttackConfig& cfg,
                       std::optional<Label> label) {
    cfg.validate();
    std::size_t k0 = predict(net, x);
    if (label && k0 != label->index) {
        AttackOutcome out;
        out.x_pert = x;
        out.success = true;
        out.iterations = 0;
        out.original_prediction = k0;
        out.final_prediction = k0;
        return out;
    }

    const std::size_t d = x.size();
    std::vector<double> r_total(d, 0.0);
    int iterations = 0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        // candidate in its final (overshooted, clipped) form, so the stop
        // condition tests exactly what the caller receives
        Tensor x_try = x;
        for (std::size_t i = 0; i < d; ++i) x_try[i] += (1.0 + cfg.overshoot) * r_total[i];
        clip_inplace(x_try, cfg.clip_min, cfg.clip_max);
        Tensor z = forward(net, x_try).logits;
        if (argmax_logits(z) != k0) break;

        JacobianMatrix j = jacobian(net, x_try);
        double best_dist = std::numeric_limits<double>::infinity();
        std::size_t best_k = k0;
        double best_wnorm = 0.0;
        auto row0 = j.row(k0);
        for (std::size_t k = 0; k < z.size(); ++k) {
            if (k == k0) continue;
            auto rowk = j.row(k);
            double wnorm_sq = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double w = rowk[i] - row0[i];
                wnorm_sq += w * w;
            }
            double wnorm = std::sqrt(wnorm_sq);
            if (wnorm < 1e-12) continue;  // parallel boundary, no direction
            double dist = std::abs(z[k] - z[k0]) / wnorm;
            if (dist < best_dist) {
                best_dist = dist;
                best_k = k;
                best_wnorm = wnorm;
            }
        }
        if (best_k == k0) break;  // every boundary degenerate: give up

        auto rowk = j.row(best_k);
        double step = best_dist / best_wnorm;  // |f| / ||w||^2
        for (std::size_t i = 0; i < d; ++i) r_total[i] += step * (rowk[i] - row0[i]);
        ++iterations;
    }

    Tensor x_pert = x;
    for (std::size_t i = 0; i < d; ++i) x_pert[i] += (1.0 + cfg.overshoot) * r_total[i];
    clip_inplace(x_pert, cfg.clip_min, cfg.clip_max);
    AttackOutcome out = finish(net, x, std::move(x_pert), k0, k0, iterations);
    out.pre_overshoot_l2 = l2_norm(r_total);
    return out;
}

AttackOutcome jsma(const Network& net, const Tensor& x, const Label& label,
                   const AttackConfig& cfg) {
    cfg.validate();
    std::size_t k0 = predict(net, x);
    Tensor x_cur = x;
    int iterations = 0;

    if (cfg.epsilon > 0.0) {
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            Tensor z = forward(net, x_cur).logits;
            std::size_t cur = argmax_logits(z);
            if (cur != k0) break;

            // runner-up class: largest logit other than the current prediction
            std::size_t t = cur == 0 ? 1 : 0;
            for (std::size_t k = 0; k < z.size(); ++k) {
                if (k != cur && z[k] > z[t]) t = k;
            }

            JacobianMatrix j = jacobian(net, x_cur);
            const std::size_t d = x_cur.size();
            struct Candidate {
                double score;
                std::size_t pixel;
                bool increase;
            };
            std::vector<Candidate> candidates;
            auto trow = j.row(t);
            for (std::size_t p = 0; p < d; ++p) {
                double alpha = trow[p];
                double beta = -alpha;
                for (std::size_t k = 0; k < z.size(); ++k) beta += j.row(k)[p];
                bool can_up = x_cur[p] < cfg.clip_max - 1e-12;
                bool can_down = x_cur[p] > cfg.clip_min + 1e-12;
                if (alpha > 0.0 && beta <= 0.0 && can_up) {
                    candidates.push_back({alpha * -beta, p, true});
                } else if (alpha < 0.0 && beta >= 0.0 && can_down) {
                    candidates.push_back({-alpha * beta, p, false});
                }
            }
            if (candidates.empty()) break;  // no admissible pixel

            std::stable_sort(candidates.begin(), candidates.end(),
                             [](const Candidate& a, const Candidate& b) {
                                 if (a.score != b.score) return a.score > b.score;
                                 return a.pixel < b.pixel;
                             });
            std::size_t n_pick = std::min<std::size_t>(cfg.pixels_per_epoch, candidates.size());
            for (std::size_t i = 0; i < n_pick; ++i) {
                const Candidate& c = candidates[i];
                x_cur[c.pixel] += c.increase ? cfg.epsilon : -cfg.epsilon;
                x_cur[c.pixel] = std::clamp(x_cur[c.pixel], cfg.clip_min, cfg.clip_max);
            }
            ++iterations;
        }
    }

    return finish(net, x, std::move(x_cur), label.index, k0, iterations);
}

AttackOutcome run_attack(const Network& net, const Tensor& x, const Label& label,
                         const AttackConfig& cfg) {
    switch (cfg.kind) {
        case AttackKind::kFgsm: return fgsm(net, x, label, cfg);
        case AttackKind::kDeepFool: return deepfool(net, x, cfg, label);
        case AttackKind::kJsma: return jsma(net, x, label, cfg);
    }
    throw Error("run_attack: unknown attack kind");
}

}  // namespace jacshield
