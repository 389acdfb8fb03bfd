#ifndef JACSHIELD_ROBUSTNESS_HPP
#define JACSHIELD_ROBUSTNESS_HPP

#include "jacshield/attacks.hpp"
#include "jacshield/data_io.hpp"

namespace jacshield {

// Per-sample fooling-distance estimates. Degenerate denominators record
// +inf with a flag instead of failing.
struct BoundReport {
    std::size_t sample_id = 0;
    std::size_t predicted_class = 0;
    double logit_margin = 0.0;           // min_{k != k*} |z_k* - z_k|
    double d_cor2 = 0.0;                 // min_k margin_k / ||J_k* - J_k||
    double d_prop3 = 0.0;                // margin / (sqrt(2) ||J^(L)||_F)
    std::optional<double> d_prop4;       // margin / (sqrt(2) ||J^(L-1)||_F), frozen last layer only
    std::optional<double> d_measured;    // deepfool pre-overshoot norm, when supplied
    bool cor2_degenerate = false;
    bool prop3_degenerate = false;
    bool prop4_degenerate = false;
};

BoundReport fooling_bounds(const Network& net, const Tensor& x,
                           std::optional<double> d_measured = {});

// (1/N) sum_i ||J^(L)(x_i)||_F, eval mode, compensated summation.
double avg_jacobian_frobenius(const Network& net, std::span<const Tensor> samples);

struct RhoAdvReport {
    double rho_adv = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_skipped_misclassified = 0;
    std::size_t n_failed = 0;
    double clean_accuracy = 0.0;
    double avg_jac_fro_clean = 0.0;      // over the whole dataset
    double avg_jac_fro_perturbed = 0.0;  // over successfully attacked inputs
    bool include_overshoot = false;
};

// Mean of (deepfool perturbation l2) / ||x||_2 over originally-correct,
// successfully attacked samples. The pre-overshoot norm is used unless
// include_overshoot is set.
RhoAdvReport rho_adv(const Network& net, const Dataset& ds, const AttackConfig& deepfool_cfg,
                     bool include_overshoot = false, int threads = 1);

struct CurvatureDiag {
    double approx_curvature = 0.0;  // (J_k1 x)^2 - (J_k2 x)^2
    double upper_bound = 0.0;       // ||J||_F^2 ||x||_2^2
};

CurvatureDiag curvature_diagnostics(const Network& net, const Tensor& x, std::size_t k1,
                                    std::size_t k2);

struct MvtDiag {
    double lhs_ratio = 0.0;  // ||z(x_pert) - z(x)|| / ||x_pert - x||
    double max_jac_fro_on_segment = 0.0;
};

MvtDiag mvt_diagnostic(const Network& net, const Tensor& x, const Tensor& x_pert,
                       std::size_t n_samples);

struct CurvePoint {
    double epsilon = 0.0;
    double accuracy = 0.0;
};

// Accuracy on attacked inputs for each epsilon of an ascending grid.
std::vector<CurvePoint> accuracy_under_attack(const Network& net, const Dataset& ds,
                                              const AttackConfig& cfg,
                                              std::span<const double> epsilon_grid,
                                              int threads = 1);

double clean_accuracy(const Network& net, const Dataset& ds, int threads = 1);

}  // namespace jacshield

#endif
