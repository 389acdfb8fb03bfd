#ifndef JACSHIELD_HARNESS_HPP
#define JACSHIELD_HARNESS_HPP

#include <json.hpp>

#include "jacshield/robustness.hpp"
#include "jacshield/trainer.hpp"

namespace jacshield {

// Experiment orchestration shared by the CLI and the acceptance suite.
// Configs are single JSON documents; unknown keys are rejected and every
// run directory receives a copy of the resolved config.

struct DatasetConfig {
    std::string kind = "synth";  // synth | mnist | cifar10
    // synth
    std::size_t classes = 10;
    std::size_t dims = 784;
    std::size_t n_per_class = 120;
    double spread = 0.15;
    // mnist / cifar10: root directory; empty falls back to
    // $JACSHIELD_DATA_DIR, then "data"
    std::string dir;
    // 0 keeps the full split
    std::size_t train_subsample = 0;
    std::size_t test_subsample = 0;
};

struct AttackEval {
    AttackConfig cfg;
    std::vector<double> epsilon_grid;  // empty: no accuracy curve for this attack
};

struct EvalConfig {
    std::size_t rho_samples = 200;
    std::size_t bound_samples = 50;
    std::size_t curve_samples = 200;
    bool include_overshoot = false;
    bool svg = false;
};

struct SweepConfig {
    std::string axis;  // "" | lambda | adv_fraction | reg_layer
    std::vector<double> values;
    std::vector<std::string> layers;
};

struct ExperimentConfig {
    int version = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "runs/out";
    DatasetConfig dataset;
    std::string architecture = "tiny-mlp";
    TrainConfig train;
    std::vector<AttackEval> attacks;
    EvalConfig eval;
    SweepConfig sweep;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct LoadedData {
    Dataset train;
    Dataset test;
};

LoadedData load_experiment_data(const ExperimentConfig& cfg);

struct TrainRunResult {
    std::string run_dir;
    std::string checkpoint_path;         // final network
    std::string phase1_checkpoint_path;
    nlohmann::json report;
};

// Phase 1 (plain cross-entropy), checkpoint, then phase 2 under the
// configured defense when epochs_phase2 > 0.
TrainRunResult run_train(const ExperimentConfig& cfg, int threads = 1);

// Attack curves, rho_adv, Table-1-style Jacobian norms and bound
// statistics for a stored checkpoint. Writes report.json plus one CSV
// per curve and optional SVG plots.
nlohmann::json run_evaluate(const std::string& checkpoint_path, const ExperimentConfig& cfg,
                            int threads = 1);

// One training+evaluation run per axis value, shared seed; emits an
// aggregated table (sweep.json + sweep.csv).
nlohmann::json run_sweep(const ExperimentConfig& cfg, int threads = 1);

// Per-sample bound, curvature and mean-value diagnostics with summary
// violation rates.
nlohmann::json run_verify(const std::string& checkpoint_path, const ExperimentConfig& cfg,
                          std::size_t n_samples, int threads = 1);

// RFC-4180 two-column curve file with a header row.
void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve);

// Minimal line plot for a single curve.
void write_curve_svg(const std::string& path, std::span<const CurvePoint> curve,
                     const std::string& title);

}  // namespace jacshield

#endif
