#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "jacshield/harness.hpp"

using namespace jacshield;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string checkpoint;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::size_t n_samples = 0;
};

ExperimentConfig load_with_overrides(const CommonArgs& args) {
    ExperimentConfig cfg = load_config_file(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.train.seed = args.seed;
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_checkpoint) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--threads", args.threads, "parallel attack evaluation threads")
        ->check(CLI::PositiveNumber);
    if (needs_checkpoint) {
        cmd->add_option("--checkpoint", args.checkpoint, "model checkpoint path")
            ->required()
            ->check(CLI::ExistingFile);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jacshield: Jacobian-regularization defense toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* train_cmd = app.add_subcommand("train", "two-phase training run");
    add_common(train_cmd, args, false);
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "attack curves, rho_adv and bound stats");
    add_common(eval_cmd, args, true);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one run per axis value");
    add_common(sweep_cmd, args, false);
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "per-sample bound/curvature/MVT diagnostics");
    add_common(verify_cmd, args, true);
    verify_cmd->add_option("--n", args.n_samples, "number of samples (default eval.bound_samples)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = load_with_overrides(args);
        if (train_cmd->parsed()) {
            TrainRunResult r = run_train(cfg, args.threads);
            std::printf("run directory: %s\n", r.run_dir.c_str());
            std::printf("clean accuracy: %.4f\n", r.report["clean_accuracy"].get<double>());
        } else if (eval_cmd->parsed()) {
            nlohmann::json r = run_evaluate(args.checkpoint, cfg, args.threads);
            std::printf("report: %s/report.json\n", cfg.output_dir.c_str());
            std::printf("clean accuracy: %.4f\n", r["clean_accuracy"].get<double>());
            if (r.contains("deepfool")) {
                std::printf("rho_adv: %.6f\n", r["deepfool"]["rho_adv"].get<double>());
            }
        } else if (sweep_cmd->parsed()) {
            nlohmann::json r = run_sweep(cfg, args.threads);
            std::printf("sweep table: %s/sweep.csv (%zu rows)\n", cfg.output_dir.c_str(),
                        r["rows"].size());
        } else if (verify_cmd->parsed()) {
            std::size_t n = args.n_samples > 0 ? args.n_samples : cfg.eval.bound_samples;
            nlohmann::json r = run_verify(args.checkpoint, cfg, n, args.threads);
            const auto& s = r["summary"];
            std::printf("verify: %s/verify.json\n", cfg.output_dir.c_str());
            std::printf("prop3<=cor2 violations: %zu\n",
                        s["prop3_le_cor2_violations"].get<std::size_t>());
            std::printf("curvature violations: %zu\n",
                        s["curvature_violations"].get<std::size_t>());
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
