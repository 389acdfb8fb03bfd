#ifndef JACSHIELD_ATTACKS_HPP
#define JACSHIELD_ATTACKS_HPP

#include <optional>

#include "jacshield/regularizers.hpp"

namespace jacshield {

enum class AttackKind : std::uint8_t { kFgsm = 0, kDeepFool = 1, kJsma = 2 };

const char* attack_kind_name(AttackKind kind);

// The printed fgsm update is x - eps*sign(grad), which decreases the
// loss; kAscent moves against the loss instead and is the default.
// kPaperLiteral keeps the printed sign.
enum class SignConvention : std::uint8_t { kAscent = 0, kPaperLiteral = 1 };

struct AttackConfig {
    AttackKind kind = AttackKind::kFgsm;
    double epsilon = 0.1;
    int max_iter = 50;          // deepfool
    double overshoot = 0.02;    // deepfool
    int epochs = 80;            // jsma
    int pixels_per_epoch = 1;   // jsma
    double clip_min = 0.0;
    double clip_max = 1.0;
    SignConvention sign_convention = SignConvention::kAscent;

    void validate() const;
};

struct PerturbationNorms {
    std::size_t l0 = 0;
    double l2 = 0.0;
    double linf = 0.0;
};

PerturbationNorms perturbation_norms(const Tensor& x, const Tensor& x_pert);

struct AttackOutcome {
    Tensor x_pert;
    bool success = false;  // final prediction differs from the reference class
    int iterations = 0;
    PerturbationNorms norms;
    double pre_overshoot_l2 = 0.0;  // deepfool: ||sum of steps|| before overshoot
    std::size_t original_prediction = 0;
    std::size_t final_prediction = 0;
};

// Reference class is the given ground-truth label; an input that is
// already misclassified counts as success even with a zero perturbation.
AttackOutcome fgsm(const Network& net, const Tensor& x, const Label& label,
                   const AttackConfig& cfg);

// Iterative multiclass L2 attack: steps to the nearest linearized
// decision boundary until the prediction flips or max_iter is hit. When
// a label is supplied and the input is already misclassified, returns
// immediate success with zero perturbation; otherwise the reference
// class is the original prediction.
AttackOutcome deepfool(const Network& net, const Tensor& x, const AttackConfig& cfg,
                       std::optional<Label> label = {});

// One-pixel-at-a-time L0 attack driven by a logit-space saliency map.
// Each epoch targets the runner-up class; a pixel is admissible for the
// increase direction when d z_t/d x_d > 0 and the summed other-class
// sensitivity is <= 0, mirrored for the decrease direction; the larger
// score wins. Saturated pixels are excluded.
AttackOutcome jsma(const Network& net, const Tensor& x, const Label& label,
                   const AttackConfig& cfg);

AttackOutcome run_attack(const Network& net, const Tensor& x, const Label& label,
                         const AttackConfig& cfg);

}  // namespace jacshield

#endif
