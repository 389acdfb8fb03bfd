#include <doctest.h>

#include <cmath>

#include "jacshield/robustness.hpp"
#include "support/test_nets.hpp"

using namespace jacshield;
using jacshield::testing::linear_net_from_rows;
using jacshield::testing::random_input;
using jacshield::testing::small_relu_net;

namespace {

AttackConfig wide_deepfool() {
    AttackConfig cfg;
    cfg.kind = AttackKind::kDeepFool;
    cfg.clip_min = -10.0;
    cfg.clip_max = 10.0;
    return cfg;
}

// closed-form deepfool distance for a one-layer linear net
double linear_distance(const Network& net, const Tensor& x) {
    Tensor z = forward(net, x).logits;
    JacobianMatrix j = jacobian(net, x);
    std::size_t k0 = predict(net, x);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k == k0) continue;
        double w2 = 0.0;
        for (std::size_t i = 0; i < j.cols(); ++i) {
            double w = j.row(k0)[i] - j.row(k)[i];
            w2 += w * w;
        }
        best = std::min(best, std::abs(z[k0] - z[k]) / std::sqrt(w2));
    }
    return best;
}

}  // namespace

TEST_CASE("fooling_bounds: linear closed forms and degenerate flags") {
    Network net = linear_net_from_rows({{1, 0}, {0, -1}});
    Tensor x({2}, {1.0, 0.0});
    BoundReport r = fooling_bounds(net, x);
    CHECK(r.predicted_class == 0);
    CHECK(r.logit_margin == doctest::Approx(1.0));
    CHECK(r.d_cor2 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.d_prop3 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(r.d_prop4.has_value());

    Network parallel = linear_net_from_rows({{0.5, 0.5}, {0.5, 0.5}}, {0.3, 0.0});
    BoundReport rp = fooling_bounds(parallel, x);
    CHECK(rp.cor2_degenerate);
    CHECK(std::isinf(rp.d_cor2));
}

TEST_CASE("fooling_bounds: frozen orthonormal last layer enables prop4") {
    // identity last layer keeps z^(L) == z^(L-1), so prop4 == prop3
    Network net = make_network({LayerSpec::dense(2, 2), LayerSpec::dense(2, 2)}, {2}, 4);
    Tensor w1 = Tensor::zeros({2, 2});
    w1.data = {1, 0, 0, -1};
    net.weights[0] = w1;
    net.biases[0] = Tensor::zeros({2});
    Tensor eye = Tensor::zeros({2, 2});
    eye.data = {1, 0, 0, 1};
    net.weights[1] = eye;
    net.biases[1] = Tensor::zeros({2});
    net.layers[1].frozen = true;

    Tensor x({2}, {1.0, 0.0});
    BoundReport r = fooling_bounds(net, x);
    REQUIRE(r.d_prop4.has_value());
    CHECK(*r.d_prop4 == doctest::Approx(r.d_prop3).epsilon(1e-12));
    CHECK(*r.d_prop4 <= r.d_cor2 + 1e-10);

    // randomly frozen orthonormal layers obey the full chain
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        Network base = small_relu_net(200 + t);
        Network frozen = freeze_orthonormal(base, dense_layer_from_output(base, 0), 11 + t);
        Tensor xt = random_input(rng, {6});
        BoundReport rb = fooling_bounds(frozen, xt);
        REQUIRE(rb.d_prop4.has_value());
        CHECK(rb.d_prop3 <= rb.d_cor2 + 1e-10);
        CHECK(*rb.d_prop4 <= rb.d_cor2 + 1e-10);
    }
}

TEST_CASE("avg_jacobian_frobenius: linear and zero nets") {
    Network net = linear_net_from_rows({{1, 0}, {0, -1}});
    std::vector<Tensor> samples{Tensor({2}, {0.1, 0.2}), Tensor({2}, {0.9, 0.4})};
    CHECK(avg_jacobian_frobenius(net, samples) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Network zero = linear_net_from_rows({{0, 0}, {0, 0}}, {0.5, 0.1});
    CHECK(avg_jacobian_frobenius(zero, samples) == 0.0);
}

TEST_CASE("rho_adv: closed-form ratios, mean, and skip accounting") {
    Network net = linear_net_from_rows({{1, 0}, {0, -1}});
    AttackConfig cfg = wide_deepfool();

    Dataset one;
    one.num_classes = 2;
    one.inputs = {Tensor({2}, {1.0, 0.0})};
    one.labels = {0};
    RhoAdvReport r1 = rho_adv(net, one, cfg);
    CHECK(r1.n_evaluated == 1);
    CHECK(r1.rho_adv == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));

    Dataset two = one;
    two.inputs.push_back(Tensor({2}, {0.6, 0.2}));
    two.labels.push_back(0);
    double ratio_a = linear_distance(net, two.inputs[0]) / two.inputs[0].l2_norm();
    double ratio_b = linear_distance(net, two.inputs[1]) / two.inputs[1].l2_norm();
    RhoAdvReport r2 = rho_adv(net, two, cfg);
    CHECK(r2.rho_adv == doctest::Approx(0.5 * (ratio_a + ratio_b)).epsilon(1e-8));

    // a misclassified sample is skipped, not attacked
    Dataset three = two;
    three.inputs.push_back(Tensor({2}, {1.0, 0.0}));
    three.labels.push_back(1);
    RhoAdvReport r3 = rho_adv(net, three, cfg);
    CHECK(r3.n_skipped_misclassified == 1);
    CHECK(r3.n_evaluated == 2);
    CHECK(r3.n_evaluated + r3.n_skipped_misclassified + r3.n_failed == three.size());

    // all samples skipped -> error
    Dataset none;
    none.num_classes = 2;
    none.inputs = {Tensor({2}, {1.0, 0.0})};
    none.labels = {1};
    CHECK_THROWS_AS((void)rho_adv(net, none, cfg), Error);
}

TEST_CASE("rho_adv: threaded evaluation is deterministic") {
    Rng rng(5);
    Network net = small_relu_net(300);
    Dataset ds;
    ds.num_classes = 3;
    for (int i = 0; i < 12; ++i) {
        ds.inputs.push_back(random_input(rng, {6}));
        ds.labels.push_back(predict(net, ds.inputs.back()));
    }
    AttackConfig cfg = wide_deepfool();
    RhoAdvReport a = rho_adv(net, ds, cfg, false, 1);
    RhoAdvReport b = rho_adv(net, ds, cfg, false, 2);
    CHECK(a.rho_adv == b.rho_adv);
    CHECK(a.n_evaluated == b.n_evaluated);
    CHECK(a.avg_jac_fro_clean == b.avg_jac_fro_clean);
}

TEST_CASE("curvature_diagnostics: direct evaluation, antisymmetry, zero input") {
    Network net = linear_net_from_rows({{1, 0}, {0, -1}});
    Tensor x({2}, {1.0, 0.0});
    CurvatureDiag d = curvature_diagnostics(net, x, 0, 1);
    CHECK(d.approx_curvature == doctest::Approx(1.0));
    CHECK(d.upper_bound == doctest::Approx(2.0));
    CHECK(d.approx_curvature <= d.upper_bound);

    CurvatureDiag swapped = curvature_diagnostics(net, x, 1, 0);
    CHECK(swapped.approx_curvature == doctest::Approx(-d.approx_curvature));

    CurvatureDiag zero = curvature_diagnostics(net, Tensor::zeros({2}), 0, 1);
    CHECK(zero.approx_curvature == 0.0);
    CHECK(zero.upper_bound == 0.0);

    CHECK_THROWS_AS((void)curvature_diagnostics(net, x, 1, 1), Error);
}

TEST_CASE("mvt_diagnostic: linear bound, first-order oracle, relu segments") {
    Network net = linear_net_from_rows({{1, 0}, {0, -1}});
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        Tensor a = random_input(rng, {2});
        Tensor b = random_input(rng, {2});
        if ((a - b).l2_norm() < 1e-9) continue;
        MvtDiag d = mvt_diagnostic(net, a, b, 8);
        CHECK(d.lhs_ratio <= std::sqrt(2.0) + 1e-12);
        CHECK(d.max_jac_fro_on_segment == doctest::Approx(std::sqrt(2.0)));
    }

    // first-order Taylor: a tiny step matches ||J dhat|| within 1%
    Network smooth = tiny_mlp(4, 3, 9);
    Tensor x = random_input(rng, {4});
    Tensor dir = Tensor::zeros({4});
    for (auto& v : dir.data) v = rng.gaussian();
    double dn = dir.l2_norm();
    Tensor x_pert = x;
    for (std::size_t i = 0; i < 4; ++i) x_pert[i] += 1e-5 * dir[i] / dn;
    MvtDiag taylor = mvt_diagnostic(smooth, x, x_pert, 2);
    JacobianMatrix j = jacobian(smooth, x);
    double expect = 0.0;
    for (std::size_t k = 0; k < j.rows(); ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < 4; ++i) p += j.row(k)[i] * dir[i] / dn;
        expect += p * p;
    }
    expect = std::sqrt(expect);
    CHECK(taylor.lhs_ratio == doctest::Approx(expect).epsilon(0.01));

    // piecewise-linear nets: dense segment sampling dominates the ratio
    Network relu_net = small_relu_net(400);
    for (int t = 0; t < 10; ++t) {
        Tensor a = random_input(rng, {6});
        Tensor b = random_input(rng, {6});
        MvtDiag d = mvt_diagnostic(relu_net, a, b, 64);
        CHECK(d.lhs_ratio <= d.max_jac_fro_on_segment + 1e-6);
    }

    CHECK_THROWS_AS((void)mvt_diagnostic(net, x, x, 8), Error);
    CHECK_THROWS_AS((void)mvt_diagnostic(net, Tensor({2}, {0., 1.}), Tensor({2}, {1., 0.}), 1),
                    Error);
}

TEST_CASE("accuracy_under_attack: null attack, curve shape, grid validation") {
    Rng rng(19);
    Network net = small_relu_net(500);
    Dataset ds;
    ds.num_classes = 3;
    for (int i = 0; i < 20; ++i) {
        ds.inputs.push_back(random_input(rng, {6}));
        ds.labels.push_back(rng.uniform_index(3));
    }
    AttackConfig cfg;
    cfg.kind = AttackKind::kFgsm;

    std::vector<double> null_grid{0.0};
    auto curve0 = accuracy_under_attack(net, ds, cfg, null_grid);
    CHECK(curve0.size() == 1);
    CHECK(curve0[0].accuracy == doctest::Approx(clean_accuracy(net, ds)));

    std::vector<double> grid{0.0, 0.05, 0.1, 0.2};
    auto curve = accuracy_under_attack(net, ds, cfg, grid, 2);
    CHECK(curve.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(curve[i].epsilon == grid[i]);

    std::vector<double> bad{0.1, 0.1};
    CHECK_THROWS_AS((void)accuracy_under_attack(net, ds, cfg, bad), Error);
    std::vector<double> empty;
    CHECK_THROWS_AS((void)accuracy_under_attack(net, ds, cfg, empty), Error);
}
