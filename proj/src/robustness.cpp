#include "jacshield/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

namespace jacshield {

namespace {

constexpr double kDegenerate = 1e-12;

// Deterministic parallel map: each index writes only its own slot; any
// reduction happens sequentially afterwards.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::size_t n_threads = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += n_threads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

BoundReport fooling_bounds(const Network& net, const Tensor& x,
                           std::optional<double> d_measured) {
    Tensor z = forward(net, x).logits;
    JacobianMatrix j = jacobian(net, x);

    BoundReport r;
    std::size_t k_star = 0;
    for (std::size_t k = 1; k < z.size(); ++k) {
        if (z[k] > z[k_star]) k_star = k;
    }
    r.predicted_class = k_star;
    r.d_measured = d_measured;

    double margin = std::numeric_limits<double>::infinity();
    double best_ratio = std::numeric_limits<double>::infinity();
    bool any_direction = false;
    auto row_star = j.row(k_star);
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k == k_star) continue;
        double gap = std::abs(z[k_star] - z[k]);
        margin = std::min(margin, gap);
        double wnorm_sq = 0.0;
        auto rowk = j.row(k);
        for (std::size_t i = 0; i < j.cols(); ++i) {
            double w = row_star[i] - rowk[i];
            wnorm_sq += w * w;
        }
        double wnorm = std::sqrt(wnorm_sq);
        if (wnorm < kDegenerate) continue;
        any_direction = true;
        best_ratio = std::min(best_ratio, gap / wnorm);
    }
    r.logit_margin = margin;
    if (any_direction) {
        r.d_cor2 = best_ratio;
    } else {
        r.d_cor2 = std::numeric_limits<double>::infinity();
        r.cor2_degenerate = true;
    }

    double fro = j.frobenius();
    if (fro < kDegenerate) {
        r.d_prop3 = std::numeric_limits<double>::infinity();
        r.prop3_degenerate = true;
    } else {
        r.d_prop3 = margin / (std::sqrt(2.0) * fro);
    }

    std::size_t last_dense = dense_layer_from_output(net, 0);
    if (net.layers[last_dense].frozen) {
        JacobianMatrix jm1 = jacobian(net, x, JacobianLayer::kLm1);
        double fro1 = jm1.frobenius();
        if (fro1 < kDegenerate) {
            r.d_prop4 = std::numeric_limits<double>::infinity();
            r.prop4_degenerate = true;
        } else {
            r.d_prop4 = margin / (std::sqrt(2.0) * fro1);
        }
    }
    return r;
}

double avg_jacobian_frobenius(const Network& net, std::span<const Tensor> samples) {
    if (samples.empty()) throw Error("avg_jacobian_frobenius: no samples");
    KahanSum sum;
    for (const Tensor& x : samples) sum.add(jacobian(net, x).frobenius());
    return sum.value() / static_cast<double>(samples.size());
}

RhoAdvReport rho_adv(const Network& net, const Dataset& ds, const AttackConfig& cfg,
                     bool include_overshoot, int threads) {
    if (ds.size() == 0) throw Error("rho_adv: empty dataset");

    struct SampleOut {
        enum { kSkipped, kFailed, kEvaluated } status = kSkipped;
        double ratio = 0.0;
        double jac_clean = 0.0;
        double jac_pert = 0.0;
        bool correct = false;
    };
    std::vector<SampleOut> outs(ds.size());

    parallel_for(ds.size(), threads, [&](std::size_t i) {
        SampleOut& o = outs[i];
        o.jac_clean = jacobian(net, ds.inputs[i]).frobenius();
        std::size_t pred = predict(net, ds.inputs[i]);
        o.correct = pred == ds.labels[i];
        if (!o.correct) {
            o.status = SampleOut::kSkipped;
            return;
        }
        AttackOutcome a = deepfool(net, ds.inputs[i], cfg, Label(ds.labels[i]));
        if (!a.success) {
            o.status = SampleOut::kFailed;
            return;
        }
        double d = include_overshoot ? a.norms.l2 : a.pre_overshoot_l2;
        double xn = ds.inputs[i].l2_norm();
        if (xn < kDegenerate) {
            o.status = SampleOut::kFailed;  // zero-norm input has no ratio
            return;
        }
        o.status = SampleOut::kEvaluated;
        o.ratio = d / xn;
        o.jac_pert = jacobian(net, a.x_pert).frobenius();
    });

    RhoAdvReport report;
    report.include_overshoot = include_overshoot;
    KahanSum ratio_sum, clean_sum, pert_sum;
    std::size_t n_correct = 0;
    for (const SampleOut& o : outs) {
        clean_sum.add(o.jac_clean);
        if (o.correct) ++n_correct;
        switch (o.status) {
            case SampleOut::kSkipped: ++report.n_skipped_misclassified; break;
            case SampleOut::kFailed: ++report.n_failed; break;
            case SampleOut::kEvaluated:
                ++report.n_evaluated;
                ratio_sum.add(o.ratio);
                pert_sum.add(o.jac_pert);
                break;
        }
    }
    if (report.n_evaluated == 0) {
        throw Error("rho_adv: no evaluable samples (all skipped or failed)");
    }
    report.rho_adv = ratio_sum.value() / static_cast<double>(report.n_evaluated);
    report.clean_accuracy = static_cast<double>(n_correct) / static_cast<double>(ds.size());
    report.avg_jac_fro_clean = clean_sum.value() / static_cast<double>(ds.size());
    report.avg_jac_fro_perturbed = pert_sum.value() / static_cast<double>(report.n_evaluated);
    return report;
}

CurvatureDiag curvature_diagnostics(const Network& net, const Tensor& x, std::size_t k1,
                                    std::size_t k2) {
    if (k1 == k2) throw Error("curvature_diagnostics: k1 must differ from k2");
    JacobianMatrix j = jacobian(net, x);
    if (k1 >= j.rows() || k2 >= j.rows()) {
        throw Error("curvature_diagnostics: class index out of range");
    }
    double p1 = dot(j.row(k1), x.data);
    double p2 = dot(j.row(k2), x.data);
    CurvatureDiag d;
    d.approx_curvature = p1 * p1 - p2 * p2;
    double xn = x.l2_norm();
    d.upper_bound = j.frobenius_sq() * xn * xn;
    if (d.approx_curvature > d.upper_bound + 1e-12 * std::max(1.0, d.upper_bound)) {
        throw NumericError("curvature_diagnostics: matrix-norm inequality violated");
    }
    return d;
}

MvtDiag mvt_diagnostic(const Network& net, const Tensor& x, const Tensor& x_pert,
                       std::size_t n_samples) {
    if (n_samples < 2) throw Error("mvt_diagnostic: need at least 2 segment samples");
    Tensor delta = x_pert - x;
    double dn = delta.l2_norm();
    if (dn < kDegenerate) throw Error("mvt_diagnostic: coincident points");

    Tensor z0 = forward(net, x).logits;
    Tensor z1 = forward(net, x_pert).logits;
    MvtDiag d;
    d.lhs_ratio = (z1 - z0).l2_norm() / dn;

    for (std::size_t i = 0; i < n_samples; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        Tensor xt = x;
        for (std::size_t p = 0; p < xt.size(); ++p) xt[p] += t * delta[p];
        d.max_jac_fro_on_segment =
            std::max(d.max_jac_fro_on_segment, jacobian(net, xt).frobenius());
    }
    return d;
}

std::vector<CurvePoint> accuracy_under_attack(const Network& net, const Dataset& ds,
                                              const AttackConfig& cfg,
                                              std::span<const double> epsilon_grid,
                                              int threads) {
    if (epsilon_grid.empty()) throw Error("accuracy_under_attack: empty grid");
    for (std::size_t i = 1; i < epsilon_grid.size(); ++i) {
        if (epsilon_grid[i] <= epsilon_grid[i - 1]) {
            throw Error("accuracy_under_attack: grid must be ascending");
        }
    }
    std::vector<CurvePoint> curve;
    curve.reserve(epsilon_grid.size());
    for (double eps : epsilon_grid) {
        AttackConfig point_cfg = cfg;
        point_cfg.epsilon = eps;
        std::vector<char> hit(ds.size(), 0);
        parallel_for(ds.size(), threads, [&](std::size_t i) {
            AttackOutcome a = run_attack(net, ds.inputs[i], Label(ds.labels[i]), point_cfg);
            hit[i] = predict(net, a.x_pert) == ds.labels[i] ? 1 : 0;
        });
        std::size_t n_hit = 0;
        for (char h : hit) n_hit += h;
        curve.push_back({eps, static_cast<double>(n_hit) / static_cast<double>(ds.size())});
    }
    return curve;
}

double clean_accuracy(const Network& net, const Dataset& ds, int threads) {
    if (ds.size() == 0) throw Error("clean_accuracy: empty dataset");
    std::vector<char> hit(ds.size(), 0);
    parallel_for(ds.size(), threads, [&](std::size_t i) {
        hit[i] = predict(net, ds.inputs[i]) == ds.labels[i] ? 1 : 0;
    });
    std::size_t n_hit = 0;
    for (char h : hit) n_hit += h;
    return static_cast<double>(n_hit) / static_cast<double>(ds.size());
}

}  // namespace jacshield
