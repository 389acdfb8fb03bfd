// Acceptance suite: one checkable criterion per function, one line of
// output each. Run with no arguments for everything, or pass criterion
// numbers (e.g. "acceptance 1 2 9").

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "jacshield/harness.hpp"
#include "support/synth_digits.hpp"
#include "support/test_nets.hpp"

using namespace jacshield;
using jacshield::testing::desk_dataset;
using jacshield::testing::random_input;

namespace {

struct Result {
    bool pass = false;
    std::string detail;
};

// ---- desk-scale trend setup (criteria 6-8) ---------------------------------

constexpr std::size_t kTrendTrain = 2000;
constexpr std::size_t kTrendTest = 1000;
constexpr std::size_t kPhase1Epochs = 10;
constexpr std::size_t kPhase2Epochs = 14;
constexpr double kTrendRate = 1e-3;
constexpr std::size_t kRhoSamples = 150;
constexpr std::size_t kCurveSamples = 1000;
constexpr double kAdvFraction = 0.2;
const std::vector<double> kLambdaGrid{0.5, 0.1, 0.05, 0.01};
const std::vector<double> kFgsmGrid{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};

struct SeedTrend {
    double acc_base = 0, acc_jac = 0;
    double jac_base = 0, jac_jac = 0;
    double rho_none = 0, rho_jac = 0, rho_jac_adv = 0;
    std::vector<CurvePoint> curve_none, curve_jac;
    double lambda_used = 0;
};

TrainConfig trend_train_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.optimizer.rate = kTrendRate;
    cfg.batch_size = 50;
    cfg.epochs_phase1 = kPhase1Epochs;
    cfg.epochs_phase2 = kPhase2Epochs;
    cfg.seed = seed;
    return cfg;
}

AttackConfig deepfool_cfg() {
    AttackConfig cfg;
    cfg.kind = AttackKind::kDeepFool;
    return cfg;
}

SeedTrend run_trend_seed(std::uint64_t seed, double lambda_hint, double* lambda_out) {
    auto data = desk_dataset(kTrendTrain, kTrendTest, seed);
    Network net = desk_convnet(mix_seed(seed, 0xBEEF));
    TrainConfig cfg = trend_train_config(seed);
    auto [base, h1] = train_phase(std::move(net), data.train, data.test, cfg);

    Dataset probe = subsample(data.test, 200, mix_seed(seed, 1));
    Dataset rho_set = subsample(data.test, kRhoSamples, mix_seed(seed, 2));
    Dataset curve_set = subsample(data.test, kCurveSamples, mix_seed(seed, 3));

    SeedTrend t;
    t.acc_base = clean_accuracy(base, data.test, 2);
    t.jac_base = avg_jacobian_frobenius(base, probe.inputs);

    // lambda tuned on the first seed over the allowed grid, reused after
    std::vector<double> candidates =
        lambda_hint > 0 ? std::vector<double>{lambda_hint} : kLambdaGrid;
    Network defended;
    for (double lambda : candidates) {
        TrainConfig p2 = cfg;
        p2.loss.reg_kind = RegKind::kJacobian;
        p2.loss.lambda = lambda;
        auto [d, h2] = post_process(base, data.train, data.test, p2);
        double jac_after = avg_jacobian_frobenius(d, probe.inputs);
        double acc_after = clean_accuracy(d, data.test, 2);
        t.lambda_used = lambda;
        t.jac_jac = jac_after;
        t.acc_jac = acc_after;
        defended = std::move(d);
        if (jac_after * 2.0 <= t.jac_base && acc_after >= t.acc_base - 0.02) break;
    }
    if (lambda_out) *lambda_out = t.lambda_used;

    TrainConfig p2adv = cfg;
    p2adv.loss.reg_kind = RegKind::kJacobian;
    p2adv.loss.lambda = t.lambda_used;
    p2adv.adv_fraction = kAdvFraction;
    AttackConfig fg;
    fg.kind = AttackKind::kFgsm;
    fg.epsilon = 0.1;
    p2adv.adv_attack = fg;
    auto [defended_adv, h3] = post_process(base, data.train, data.test, p2adv);

    AttackConfig df = deepfool_cfg();
    t.rho_none = rho_adv(base, rho_set, df, false, 2).rho_adv;
    t.rho_jac = rho_adv(defended, rho_set, df, false, 2).rho_adv;
    t.rho_jac_adv = rho_adv(defended_adv, rho_set, df, false, 2).rho_adv;

    AttackConfig fgsm_eval;
    fgsm_eval.kind = AttackKind::kFgsm;
    t.curve_none = accuracy_under_attack(base, curve_set, fgsm_eval, kFgsmGrid, 2);
    t.curve_jac = accuracy_under_attack(defended, curve_set, fgsm_eval, kFgsmGrid, 2);
    return t;
}

const std::vector<SeedTrend>& trend_runs() {
    static std::vector<SeedTrend> runs = [] {
        std::vector<SeedTrend> out;
        double lambda = 0;
        out.push_back(run_trend_seed(1, 0, &lambda));
        out.push_back(run_trend_seed(2, lambda, nullptr));
        out.push_back(run_trend_seed(3, lambda, nullptr));
        return out;
    }();
    return runs;
}

// ---- criteria ----------------------------------------------------------------

Result criterion_1() {
    // first- and second-order gradients vs central finite differences on
    // randomized tiny graphs
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        Graph g;
        std::size_t dims[5];
        std::size_t n_layers = 2 + rng.uniform_index(3);  // 2..4 parametric layers
        for (std::size_t i = 0; i <= n_layers; ++i) dims[i] = 2 + rng.uniform_index(3);

        NodeId x = g.input({1, dims[0]});
        Tensor tx = Tensor::zeros({1, dims[0]});
        for (auto& v : tx.data) v = rng.gaussian() * 0.8;
        g.bind(x, tx);

        std::vector<NodeId> weights;
        NodeId cur = x;
        for (std::size_t i = 0; i < n_layers; ++i) {
            NodeId w = g.input({dims[i], dims[i + 1]});
            Tensor tw = Tensor::zeros({dims[i], dims[i + 1]});
            for (auto& v : tw.data) v = rng.gaussian() * 0.7;
            g.bind(w, tw);
            weights.push_back(w);
            cur = g.matmul(cur, w);
            if (i + 1 < n_layers) cur = g.tanh(cur);
        }
        Tensor onehot = Tensor::zeros({dims[n_layers]});
        onehot[rng.uniform_index(dims[n_layers])] = 1.0;
        NodeId loss = g.softmax_xent(g.reshape(cur, {dims[n_layers]}), g.constant(onehot));

        NodeId wrt = weights[rng.uniform_index(weights.size())];
        auto first = g.check_gradient(loss, wrt, 1e-5, 1e-4);
        worst = std::max(worst, first.max_rel_err);
        if (!first.pass) {
            return {false, "first-order mismatch, rel err " + std::to_string(first.max_rel_err)};
        }

        // second order: differentiate the squared gradient norm
        NodeId gx = g.gradient_one(loss, x);
        NodeId s = g.sum(g.square(gx));
        NodeId wrt2 = trial % 2 == 0 ? x : wrt;
        auto second = g.check_gradient(s, wrt2, 1e-5, 1e-4);
        worst = std::max(worst, second.max_rel_err);
        if (!second.pass) {
            return {false, "second-order mismatch, rel err " + std::to_string(second.max_rel_err)};
        }
    }
    std::ostringstream os;
    os << "200 random graphs, worst rel err " << worst;
    return {true, os.str()};
}

Result criterion_2() {
    Rng rng(202);
    // linear nets: jacobian equals the (transposed) weight matrix exactly
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 2 + rng.uniform_index(4);
        std::size_t k = 2 + rng.uniform_index(3);
        Network net = make_network({LayerSpec::dense(d, k)}, {d}, 900 + t);
        JacobianMatrix j = jacobian(net, random_input(rng, {d}));
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                if (j.matrix.at(r, c) != net.weights[0].at(c, r)) {
                    return {false, "linear jacobian differs from weights"};
                }
            }
        }
    }
    // frobenius identity
    for (int t = 0; t < 50; ++t) {
        Network net = jacshield::testing::small_relu_net(300 + t);
        JacobianMatrix j = jacobian(net, random_input(rng, {6}));
        double rows = 0.0;
        for (std::size_t r = 0; r < j.rows(); ++r) {
            for (double v : j.row(r)) rows += v * v;
        }
        if (std::abs(j.frobenius_sq() - rows) > 1e-12 * std::max(1.0, rows)) {
            return {false, "frobenius identity off"};
        }
    }
    // cross-lipschitz expansion identity on 50 random nets
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        Network net = jacshield::testing::small_relu_net(600 + t, 5, 4);
        Tensor x = random_input(rng, {5});
        Graph g;
        NetGraphRefs refs = bind_weights(g, net);
        double direct =
            g.evaluate_one(cross_lipschitz_penalty(g, net, refs, std::vector<Tensor>{x}))[0];
        JacobianMatrix j = jacobian(net, x);
        double sum_sq = 0.0;
        std::vector<double> row_sum(j.cols(), 0.0);
        for (std::size_t r = 0; r < j.rows(); ++r) {
            auto row = j.row(r);
            for (std::size_t c = 0; c < j.cols(); ++c) {
                sum_sq += row[c] * row[c];
                row_sum[c] += row[c];
            }
        }
        double expansion = 2.0 * static_cast<double>(j.rows()) * sum_sq;
        for (double v : row_sum) expansion -= 2.0 * v * v;
        double err = std::abs(direct - expansion) / std::max(1.0, std::abs(expansion));
        worst = std::max(worst, err);
        if (err > 1e-8) return {false, "cross-lipschitz expansion off by " + std::to_string(err)};
    }
    std::ostringstream os;
    os << "jacobian==W exact, frobenius identity <=1e-12, expansion worst rel " << worst;
    return {true, os.str()};
}

Network random_mlp(Rng& rng, std::uint64_t seed, std::size_t d, std::size_t k) {
    std::vector<LayerSpec> layers;
    std::size_t hidden = k + 2 + rng.uniform_index(6);  // wide enough to freeze orthonormal
    layers.push_back(LayerSpec::dense(d, hidden));
    layers.push_back(rng.uniform() < 0.5 ? LayerSpec::relu() : LayerSpec::tanh());
    layers.push_back(LayerSpec::dense(hidden, k));
    return make_network(std::move(layers), {d}, seed);
}

Result criterion_3() {
    Rng rng(303);
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t d = 3 + rng.uniform_index(5);
        std::size_t k = 2 + rng.uniform_index(4);
        Network net = random_mlp(rng, 3000 + t, d, k);
        if (t % 2 == 0) {
            net = freeze_orthonormal(net, dense_layer_from_output(net, 0), 40 + t);
        }
        Tensor x = random_input(rng, {d});
        BoundReport b = fooling_bounds(net, x);
        if (b.d_prop3 > b.d_cor2 + 1e-10) ++violations;
        if (b.d_prop4 && *b.d_prop4 > b.d_cor2 + 1e-10) ++violations;
    }
    if (violations > 0) {
        return {false, std::to_string(violations) + " bound-chain violations in 1000 draws"};
    }

    // deepfool pre-overshoot norm vs the closed-form distance on exactly
    // linear networks
    double worst = 0.0;
    AttackConfig cfg = deepfool_cfg();
    cfg.clip_min = -100.0;
    cfg.clip_max = 100.0;
    for (int t = 0; t < 200; ++t) {
        std::size_t d = 2 + rng.uniform_index(5);
        std::size_t k = 2 + rng.uniform_index(4);
        Network net = make_network({LayerSpec::dense(d, k)}, {d}, 7000 + t);
        for (auto& v : net.biases.back().data) v = 0.3 * rng.gaussian();
        Tensor x = random_input(rng, {d});
        BoundReport b = fooling_bounds(net, x);
        if (b.cor2_degenerate) continue;
        AttackOutcome a = deepfool(net, x, cfg);
        if (!a.success) return {false, "deepfool failed on a linear net"};
        double err = std::abs(a.pre_overshoot_l2 - b.d_cor2) / std::max(1.0, b.d_cor2);
        worst = std::max(worst, err);
        if (err > 1e-8) {
            return {false, "deepfool norm off the closed form by " + std::to_string(err)};
        }
    }
    std::ostringstream os;
    os << "0 violations in 1000 draws; deepfool vs closed form worst rel " << worst;
    return {true, os.str()};
}

Result criterion_4() {
    Rng rng(404);
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t d = 3 + rng.uniform_index(5);
        std::size_t k = 2 + rng.uniform_index(4);
        Network net = random_mlp(rng, 4000 + t, d, k);
        Tensor x = random_input(rng, {d});
        std::size_t k1 = rng.uniform_index(k);
        std::size_t k2 = (k1 + 1 + rng.uniform_index(k - 1)) % k;
        CurvatureDiag c = curvature_diagnostics(net, x, k1, k2);
        if (c.approx_curvature > c.upper_bound) ++violations;
    }
    if (violations > 0) {
        return {false, std::to_string(violations) + " curvature violations in 1000 draws"};
    }
    return {true, "0 violations in 1000 draws"};
}

Result criterion_5() {
    Rng rng(505);
    double worst_slack = -1e300;
    for (int t = 0; t < 200; ++t) {
        std::size_t d = 4 + rng.uniform_index(4);
        Network net = make_network({LayerSpec::dense(d, 8), LayerSpec::relu(),
                                    LayerSpec::dense(8, 6), LayerSpec::relu(),
                                    LayerSpec::dense(6, 3)},
                                   {d}, 5000 + t);
        Tensor a = random_input(rng, {d});
        Tensor b = random_input(rng, {d});
        if ((a - b).l2_norm() < 1e-9) continue;
        MvtDiag m = mvt_diagnostic(net, a, b, 64);
        double slack = m.lhs_ratio - m.max_jac_fro_on_segment;
        worst_slack = std::max(worst_slack, slack);
        if (slack > 1e-6) {
            return {false, "mean-value ratio exceeded the segment max by " +
                               std::to_string(slack)};
        }
    }
    std::ostringstream os;
    os << "200 relu pairs, worst (lhs - max) = " << worst_slack;
    return {true, os.str()};
}

Result criterion_6() {
    const SeedTrend& t = trend_runs()[0];
    double drop = t.jac_base / std::max(t.jac_jac, 1e-12);
    bool pass = drop >= 2.0 && t.acc_jac >= t.acc_base - 0.02;
    std::ostringstream os;
    os << "lambda=" << t.lambda_used << ": avg||J|| " << t.jac_base << " -> " << t.jac_jac
       << " (x" << drop << "), accuracy " << t.acc_base << " -> " << t.acc_jac;
    return {pass, os.str()};
}

Result criterion_7() {
    int ratio_ok = 0, adv_ok = 0;
    std::ostringstream os;
    for (const SeedTrend& t : trend_runs()) {
        bool a = t.rho_jac >= 1.2 * t.rho_none;
        bool b = t.rho_jac_adv >= t.rho_jac;
        ratio_ok += a;
        adv_ok += b;
        os << "[none " << t.rho_none << ", jac " << t.rho_jac << ", jac+adv " << t.rho_jac_adv
           << "] ";
    }
    bool pass = ratio_ok >= 2 && adv_ok >= 2;
    os << "(rho_jac>=1.2x on " << ratio_ok << "/3, adv>=jac on " << adv_ok << "/3)";
    return {pass, os.str()};
}

Result criterion_8() {
    int dominant = 0;
    std::ostringstream os;
    for (const SeedTrend& t : trend_runs()) {
        bool all = true;
        os << "[";
        for (std::size_t i = 0; i < t.curve_none.size(); ++i) {
            bool ok = t.curve_jac[i].accuracy >= t.curve_none[i].accuracy;
            if (!ok) all = false;
            os << t.curve_none[i].accuracy << (ok ? "<=" : ">!") << t.curve_jac[i].accuracy
               << (i + 1 < t.curve_none.size() ? " " : "");
        }
        dominant += all;
        os << (all ? "] dominates " : "] crosses ");
    }
    os << "(" << dominant << "/3 seeds)";
    return {dominant >= 2, os.str()};
}

Result criterion_9() {
    Rng rng(909);
    Dataset ds = synth_gaussians(3, 12, 400, 0.12, 99);  // 1200 samples
    Network net = make_network({LayerSpec::dense(12, 16), LayerSpec::relu(),
                                LayerSpec::dense(16, 3)},
                               {12}, 4242);

    std::size_t fgsm_viol = 0, jsma_viol = 0, df_viol = 0, clip_viol = 0;
    AttackConfig fg;
    fg.kind = AttackKind::kFgsm;
    fg.epsilon = 0.12;
    AttackConfig js;
    js.kind = AttackKind::kJsma;
    js.epsilon = 0.2;
    js.epochs = 20;
    js.pixels_per_epoch = 1;
    AttackConfig df = deepfool_cfg();

    for (std::size_t i = 0; i < 1000; ++i) {
        const Tensor& x = ds.inputs[i];
        Label y(ds.labels[i]);
        AttackOutcome a = fgsm(net, x, y, fg);
        if (a.norms.linf > fg.epsilon + 1e-12) ++fgsm_viol;
        for (double v : a.x_pert.data) {
            if (v < fg.clip_min || v > fg.clip_max) ++clip_viol;
        }
        AttackOutcome b = jsma(net, x, y, js);
        if (b.norms.l0 > static_cast<std::size_t>(js.epochs * js.pixels_per_epoch)) ++jsma_viol;
        AttackOutcome c = deepfool(net, x, df);
        if (c.success && predict(net, c.x_pert) == c.original_prediction) ++df_viol;
    }
    bool pass = fgsm_viol == 0 && jsma_viol == 0 && df_viol == 0 && clip_viol == 0;
    std::ostringstream os;
    os << "1000 samples/attack: fgsm linf viol " << fgsm_viol << ", jsma l0 viol " << jsma_viol
       << ", deepfool success-flag viol " << df_viol << ", clip viol " << clip_viol;
    return {pass, os.str()};
}

Result criterion_10() {
    namespace fs = std::filesystem;
    nlohmann::json j = {
        {"version", 1},
        {"seed", 17},
        {"output_dir", "runs/acc10"},
        {"dataset",
         {{"kind", "synth"}, {"classes", 3}, {"dims", 6}, {"n_per_class", 60}, {"spread", 0.1}}},
        {"architecture", "tiny-mlp"},
        {"train",
         {{"optimizer", {{"kind", "adam"}, {"rate", 0.02}}},
          {"batch_size", 30},
          {"epochs_phase1", 5},
          {"epochs_phase2", 4},
          {"loss", {{"lambda", 0.3}, {"reg_kind", "jacobian"}}}}},
        {"attacks",
         {{{"kind", "fgsm"}, {"epsilon_grid", {0.0, 0.1, 0.2}}},
          {{"kind", "deepfool"}, {"max_iter", 40}}}},
        {"eval", {{"rho_samples", 20}, {"bound_samples", 10}, {"curve_samples", 20}}}};
    fs::remove_all("runs/acc10");
    ExperimentConfig cfg = parse_config(j);

    auto read_bytes = [](const std::string& p) {
        std::ifstream is(p, std::ios::binary);
        return std::vector<char>((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
    };
    TrainRunResult r1 = run_train(cfg);
    auto ckpt1 = read_bytes(r1.checkpoint_path);
    auto p1_1 = read_bytes(r1.phase1_checkpoint_path);
    TrainRunResult r2 = run_train(cfg);
    auto ckpt2 = read_bytes(r2.checkpoint_path);
    auto p1_2 = read_bytes(r2.phase1_checkpoint_path);
    bool ckpt_ok = !ckpt1.empty() && ckpt1 == ckpt2 && p1_1 == p1_2;

    nlohmann::json e1 = run_evaluate(r1.checkpoint_path, cfg, 2);
    nlohmann::json e2 = run_evaluate(r2.checkpoint_path, cfg, 1);
    e1.erase("timestamp");
    e2.erase("timestamp");
    nlohmann::json t1 = r1.report;
    nlohmann::json t2 = r2.report;
    t1.erase("timestamp");
    t2.erase("timestamp");
    bool report_ok = e1 == e2 && t1 == t2;

    std::ostringstream os;
    os << "checkpoints " << (ckpt_ok ? "bit-identical" : "DIFFER") << ", reports "
       << (report_ok ? "identical modulo timestamp" : "DIFFER");
    return {ckpt_ok && report_ok, os.str()};
}

Result criterion_11() {
    const std::size_t n_train = 800, n_test = 400;
    const double lambda = 0.5;  // the value the desk-scale setup tunes to
    int ordered = 0;
    std::ostringstream os;
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
        auto data = desk_dataset(n_train, n_test, seed);
        Network net = desk_convnet(mix_seed(seed, 0xD00D));
        TrainConfig cfg;
        cfg.optimizer.rate = kTrendRate;
        cfg.batch_size = 25;
        cfg.epochs_phase1 = 6;
        cfg.epochs_phase2 = 5;
        cfg.seed = seed;
        auto [base, h1] = train_phase(std::move(net), data.train, data.test, cfg);

        Dataset rho_set = subsample(data.test, 200, mix_seed(seed, 9));
        AttackConfig df = deepfool_cfg();
        double rho[3] = {0, 0, 0};
        JacobianLayer layers[3] = {JacobianLayer::kL, JacobianLayer::kLm1, JacobianLayer::kLm2};
        for (int li = 0; li < 3; ++li) {
            TrainConfig p2 = cfg;
            p2.loss.reg_kind = RegKind::kJacobian;
            p2.loss.lambda = lambda;
            p2.loss.reg_layer = layers[li];
            auto [defended, h2] = post_process(base, data.train, data.test, p2);
            rho[li] = rho_adv(defended, rho_set, df, false, 2).rho_adv;
        }
        bool ok = rho[0] >= rho[1] && rho[1] >= rho[2];
        ordered += ok;
        os << "[L " << rho[0] << " / L-1 " << rho[1] << " / L-2 " << rho[2] << "] ";
    }
    os << "(" << ordered << "/3 seeds ordered)";
    return {ordered >= 2, os.str()};
}

using CriterionFn = std::function<Result()>;

const std::map<int, std::pair<const char*, CriterionFn>>& criteria() {
    static const std::map<int, std::pair<const char*, CriterionFn>> table = {
        {1, {"autodiff vs finite differences (1st and 2nd order)", criterion_1}},
        {2, {"jacobian identities", criterion_2}},
        {3, {"bound chain and deepfool closed form", criterion_3}},
        {4, {"curvature inequality", criterion_4}},
        {5, {"mean-value diagnostic on relu segments", criterion_5}},
        {6, {"desk-scale jacobian-norm drop at stable accuracy", criterion_6}},
        {7, {"desk-scale rho_adv ordering", criterion_7}},
        {8, {"desk-scale fgsm curve dominance", criterion_8}},
        {9, {"attack contracts", criterion_9}},
        {10, {"determinism of train and evaluate runs", criterion_10}},
        {11, {"layer L >= L-1 >= L-2 regularization trend", criterion_11}},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& [id, entry] : criteria()) {
                std::printf("%2d  %s\n", id, entry.first);
            }
            return 0;
        }
        selected.push_back(std::atoi(argv[i]));
    }
    if (selected.empty()) {
        for (const auto& [id, entry] : criteria()) selected.push_back(id);
    }

    int failures = 0;
    for (int id : selected) {
        auto it = criteria().find(id);
        if (it == criteria().end()) {
            std::printf("[FAIL] criterion %d: unknown criterion id\n", id);
            ++failures;
            continue;
        }
        Result r;
        try {
            r = it->second.second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d: %s  --  %s\n", r.pass ? "PASS" : "FAIL", id,
                    it->second.first, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
