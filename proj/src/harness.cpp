#include "jacshield/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jacshield {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_keys(const json& j, const char* ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string("config: ") + ctx + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + ctx);
        }
    }
}

RegKind reg_kind_from_string(const std::string& s) {
    if (s == "none") return RegKind::kNone;
    if (s == "jacobian") return RegKind::kJacobian;
    if (s == "input_gradient") return RegKind::kInputGradient;
    if (s == "cross_lipschitz") return RegKind::kCrossLipschitz;
    throw ConfigError("config: unknown reg_kind '" + s + "'");
}

JacobianLayer reg_layer_from_string(const std::string& s) {
    if (s == "L") return JacobianLayer::kL;
    if (s == "L-1") return JacobianLayer::kLm1;
    if (s == "L-2") return JacobianLayer::kLm2;
    throw ConfigError("config: unknown reg_layer '" + s + "'");
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "fgsm") return AttackKind::kFgsm;
    if (s == "deepfool") return AttackKind::kDeepFool;
    if (s == "jsma") return AttackKind::kJsma;
    throw ConfigError("config: unknown attack kind '" + s + "'");
}

SignConvention sign_from_string(const std::string& s) {
    if (s == "ascent") return SignConvention::kAscent;
    if (s == "paper_literal") return SignConvention::kPaperLiteral;
    throw ConfigError("config: unknown sign_convention '" + s + "'");
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::kAdam;
    if (s == "rmsprop") return OptimizerKind::kRmsProp;
    if (s == "sgd") return OptimizerKind::kSgd;
    throw ConfigError("config: unknown optimizer '" + s + "'");
}

const char* sign_to_string(SignConvention s) {
    return s == SignConvention::kAscent ? "ascent" : "paper_literal";
}

const char* reg_layer_to_string(JacobianLayer l) { return jacobian_layer_name(l); }

AttackConfig parse_attack(const json& j, const char* ctx) {
    require_keys(j, ctx,
                 {"kind", "epsilon", "epsilon_grid", "max_iter", "overshoot", "epochs",
                  "pixels_per_epoch", "clip_min", "clip_max", "sign_convention"});
    AttackConfig a;
    a.kind = attack_kind_from_string(j.value("kind", std::string("fgsm")));
    a.epsilon = j.value("epsilon", 0.1);
    a.max_iter = j.value("max_iter", 50);
    a.overshoot = j.value("overshoot", 0.02);
    a.epochs = j.value("epochs", 80);
    a.pixels_per_epoch = j.value("pixels_per_epoch", 1);
    a.clip_min = j.value("clip_min", 0.0);
    a.clip_max = j.value("clip_max", 1.0);
    a.sign_convention = sign_from_string(j.value("sign_convention", std::string("ascent")));
    a.validate();
    return a;
}

json attack_to_json(const AttackConfig& a, const std::vector<double>* grid = nullptr) {
    json j;
    j["kind"] = attack_kind_name(a.kind);
    j["epsilon"] = a.epsilon;
    j["max_iter"] = a.max_iter;
    j["overshoot"] = a.overshoot;
    j["epochs"] = a.epochs;
    j["pixels_per_epoch"] = a.pixels_per_epoch;
    j["clip_min"] = a.clip_min;
    j["clip_max"] = a.clip_max;
    j["sign_convention"] = sign_to_string(a.sign_convention);
    if (grid) j["epsilon_grid"] = *grid;
    return j;
}

std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << content;
    if (!os) throw IoError("write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string data_root(const DatasetConfig& cfg) {
    if (!cfg.dir.empty()) return cfg.dir;
    if (const char* env = std::getenv("JACSHIELD_DATA_DIR")) return env;
    return "data";
}

json dataset_summary(const ExperimentConfig& cfg, const LoadedData& data) {
    json j;
    j["kind"] = cfg.dataset.kind;
    j["name"] = data.train.name;
    j["classes"] = data.train.num_classes;
    j["train_size"] = data.train.size();
    j["test_size"] = data.test.size();
    return j;
}

json defense_summary(const TrainConfig& t) {
    json j;
    j["reg_kind"] = reg_kind_name(t.loss.reg_kind);
    j["lambda"] = t.loss.lambda;
    j["reg_layer"] = reg_layer_to_string(t.loss.reg_layer);
    j["per_sample_sqrt"] = t.loss.per_sample_sqrt;
    j["jacobian_eval_mode"] = t.loss.jacobian_eval_mode;
    j["adv_fraction"] = t.adv_fraction;
    // adversarial examples are regenerated each epoch against the
    // current weights
    j["adv_online"] = t.adv_fraction > 0.0;
    if (t.adv_attack) j["adv_attack"] = attack_to_json(*t.adv_attack);
    return j;
}

json history_to_json(const TrainHistory& h) {
    json arr = json::array();
    for (const EpochRecord& r : h) {
        json e;
        e["epoch"] = r.epoch;
        e["phase"] = r.phase;
        e["loss_total"] = r.loss_total;
        e["ce_total"] = r.ce_total;
        e["penalty_total"] = r.penalty_total;
        e["test_accuracy"] = r.test_accuracy;
        e["avg_jac_fro_probe"] = r.avg_jac_fro_probe;
        arr.push_back(e);
    }
    return arr;
}

const AttackEval* find_attack(const std::vector<AttackEval>& attacks, AttackKind kind) {
    for (const AttackEval& a : attacks) {
        if (a.cfg.kind == kind) return &a;
    }
    return nullptr;
}

AttackConfig default_deepfool() {
    AttackConfig cfg;
    cfg.kind = AttackKind::kDeepFool;
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    require_keys(j, "root",
                 {"version", "seed", "output_dir", "dataset", "architecture", "train", "attacks",
                  "eval", "sweep"});
    ExperimentConfig cfg;
    cfg.version = j.value("version", 1);
    if (cfg.version != 1) throw ConfigError("config: unsupported version");
    cfg.seed = j.value("seed", 0ull);
    cfg.output_dir = j.value("output_dir", std::string("runs/out"));
    cfg.architecture = j.value("architecture", std::string("tiny-mlp"));

    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        require_keys(d, "dataset",
                     {"kind", "classes", "dims", "n_per_class", "spread", "dir",
                      "train_subsample", "test_subsample"});
        cfg.dataset.kind = d.value("kind", std::string("synth"));
        if (cfg.dataset.kind != "synth" && cfg.dataset.kind != "mnist" &&
            cfg.dataset.kind != "cifar10") {
            throw ConfigError("config: unknown dataset kind '" + cfg.dataset.kind + "'");
        }
        cfg.dataset.classes = d.value("classes", 10u);
        cfg.dataset.dims = d.value("dims", 784u);
        cfg.dataset.n_per_class = d.value("n_per_class", 120u);
        cfg.dataset.spread = d.value("spread", 0.15);
        cfg.dataset.dir = d.value("dir", std::string());
        cfg.dataset.train_subsample = d.value("train_subsample", 0u);
        cfg.dataset.test_subsample = d.value("test_subsample", 0u);
    }

    if (j.contains("train")) {
        const json& t = j["train"];
        require_keys(t, "train",
                     {"optimizer", "batch_size", "epochs_phase1", "epochs_phase2", "loss",
                      "adv_fraction", "adv_attack", "probe_size"});
        if (t.contains("optimizer")) {
            const json& o = t["optimizer"];
            require_keys(o, "train.optimizer", {"kind", "rate", "beta1", "beta2", "decay", "eps"});
            cfg.train.optimizer.kind = optimizer_from_string(o.value("kind", std::string("adam")));
            cfg.train.optimizer.rate = o.value("rate", 1e-4);
            cfg.train.optimizer.beta1 = o.value("beta1", 0.9);
            cfg.train.optimizer.beta2 = o.value("beta2", 0.999);
            cfg.train.optimizer.decay = o.value("decay", 0.9);
            cfg.train.optimizer.eps = o.value("eps", 1e-8);
        }
        cfg.train.batch_size = t.value("batch_size", 50u);
        cfg.train.epochs_phase1 = t.value("epochs_phase1", 0u);
        cfg.train.epochs_phase2 = t.value("epochs_phase2", 0u);
        if (t.contains("loss")) {
            const json& l = t["loss"];
            require_keys(l, "train.loss",
                         {"lambda", "reg_kind", "reg_layer", "per_sample_sqrt",
                          "jacobian_eval_mode"});
            cfg.train.loss.lambda = l.value("lambda", 0.0);
            cfg.train.loss.reg_kind = reg_kind_from_string(l.value("reg_kind", std::string("none")));
            cfg.train.loss.reg_layer =
                reg_layer_from_string(l.value("reg_layer", std::string("L")));
            cfg.train.loss.per_sample_sqrt = l.value("per_sample_sqrt", false);
            cfg.train.loss.jacobian_eval_mode = l.value("jacobian_eval_mode", false);
        }
        cfg.train.adv_fraction = t.value("adv_fraction", 0.0);
        if (t.contains("adv_attack")) {
            cfg.train.adv_attack = parse_attack(t["adv_attack"], "train.adv_attack");
        }
        cfg.train.probe_size = t.value("probe_size", 100u);
    }
    cfg.train.seed = cfg.seed;

    if (j.contains("attacks")) {
        if (!j["attacks"].is_array()) throw ConfigError("config: attacks must be an array");
        for (const json& a : j["attacks"]) {
            AttackEval ae;
            ae.cfg = parse_attack(a, "attacks[]");
            if (a.contains("epsilon_grid")) {
                ae.epsilon_grid = a["epsilon_grid"].get<std::vector<double>>();
            }
            cfg.attacks.push_back(std::move(ae));
        }
    }

    if (j.contains("eval")) {
        const json& e = j["eval"];
        require_keys(e, "eval",
                     {"rho_samples", "bound_samples", "curve_samples", "include_overshoot",
                      "svg"});
        cfg.eval.rho_samples = e.value("rho_samples", 200u);
        cfg.eval.bound_samples = e.value("bound_samples", 50u);
        cfg.eval.curve_samples = e.value("curve_samples", 200u);
        cfg.eval.include_overshoot = e.value("include_overshoot", false);
        cfg.eval.svg = e.value("svg", false);
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        require_keys(s, "sweep", {"axis", "values", "layers"});
        cfg.sweep.axis = s.value("axis", std::string());
        if (s.contains("values")) cfg.sweep.values = s["values"].get<std::vector<double>>();
        if (s.contains("layers")) {
            cfg.sweep.layers = s["layers"].get<std::vector<std::string>>();
        }
    }

    cfg.train.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("config: cannot open '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value in '" + path + "': " + e.what());
    }
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["architecture"] = cfg.architecture;
    json d;
    d["kind"] = cfg.dataset.kind;
    d["classes"] = cfg.dataset.classes;
    d["dims"] = cfg.dataset.dims;
    d["n_per_class"] = cfg.dataset.n_per_class;
    d["spread"] = cfg.dataset.spread;
    d["dir"] = cfg.dataset.dir;
    d["train_subsample"] = cfg.dataset.train_subsample;
    d["test_subsample"] = cfg.dataset.test_subsample;
    j["dataset"] = d;

    json t;
    json o;
    o["kind"] = optimizer_kind_name(cfg.train.optimizer.kind);
    o["rate"] = cfg.train.optimizer.rate;
    o["beta1"] = cfg.train.optimizer.beta1;
    o["beta2"] = cfg.train.optimizer.beta2;
    o["decay"] = cfg.train.optimizer.decay;
    o["eps"] = cfg.train.optimizer.eps;
    t["optimizer"] = o;
    t["batch_size"] = cfg.train.batch_size;
    t["epochs_phase1"] = cfg.train.epochs_phase1;
    t["epochs_phase2"] = cfg.train.epochs_phase2;
    json l;
    l["lambda"] = cfg.train.loss.lambda;
    l["reg_kind"] = reg_kind_name(cfg.train.loss.reg_kind);
    l["reg_layer"] = reg_layer_to_string(cfg.train.loss.reg_layer);
    l["per_sample_sqrt"] = cfg.train.loss.per_sample_sqrt;
    l["jacobian_eval_mode"] = cfg.train.loss.jacobian_eval_mode;
    t["loss"] = l;
    t["adv_fraction"] = cfg.train.adv_fraction;
    if (cfg.train.adv_attack) t["adv_attack"] = attack_to_json(*cfg.train.adv_attack);
    t["probe_size"] = cfg.train.probe_size;
    j["train"] = t;

    json attacks = json::array();
    for (const AttackEval& a : cfg.attacks) {
        attacks.push_back(attack_to_json(a.cfg, &a.epsilon_grid));
    }
    j["attacks"] = attacks;

    json e;
    e["rho_samples"] = cfg.eval.rho_samples;
    e["bound_samples"] = cfg.eval.bound_samples;
    e["curve_samples"] = cfg.eval.curve_samples;
    e["include_overshoot"] = cfg.eval.include_overshoot;
    e["svg"] = cfg.eval.svg;
    j["eval"] = e;

    json s;
    s["axis"] = cfg.sweep.axis;
    s["values"] = cfg.sweep.values;
    s["layers"] = cfg.sweep.layers;
    j["sweep"] = s;
    return j;
}

LoadedData load_experiment_data(const ExperimentConfig& cfg) {
    LoadedData data;
    const DatasetConfig& d = cfg.dataset;
    if (d.kind == "synth") {
        // one draw, block-split per class so train and test share centers
        std::size_t test_per_class = std::max<std::size_t>(1, d.n_per_class / 4);
        Dataset full = synth_gaussians(d.classes, d.dims, d.n_per_class + test_per_class,
                                       d.spread, mix_seed(cfg.seed, 0xDA7A));
        data.train.name = data.test.name = full.name;
        data.train.num_classes = data.test.num_classes = full.num_classes;
        data.train.split = "train";
        data.test.split = "test";
        std::size_t block = d.n_per_class + test_per_class;
        for (std::size_t c = 0; c < d.classes; ++c) {
            for (std::size_t i = 0; i < block; ++i) {
                std::size_t idx = c * block + i;
                Dataset& dst = i < d.n_per_class ? data.train : data.test;
                dst.inputs.push_back(full.inputs[idx]);
                dst.labels.push_back(full.labels[idx]);
            }
        }
    } else if (d.kind == "mnist") {
        std::string root = data_root(d);
        data.train = load_idx(root + "/train-images-idx3-ubyte", root + "/train-labels-idx1-ubyte");
        data.train.split = "train";
        data.test = load_idx(root + "/t10k-images-idx3-ubyte", root + "/t10k-labels-idx1-ubyte");
        data.test.split = "test";
    } else if (d.kind == "cifar10") {
        std::string root = data_root(d);
        data.train = load_cifar10(root + "/data_batch_1.bin");
        data.train.split = "train";
        data.test = load_cifar10(root + "/test_batch.bin");
        data.test.split = "test";
    } else {
        throw ConfigError("config: unknown dataset kind '" + d.kind + "'");
    }

    if (d.train_subsample > 0 && d.train_subsample < data.train.size()) {
        data.train = subsample(data.train, d.train_subsample, mix_seed(cfg.seed, 0x7A1));
    }
    if (d.test_subsample > 0 && d.test_subsample < data.test.size()) {
        data.test = subsample(data.test, d.test_subsample, mix_seed(cfg.seed, 0x7A2));
    }
    return data;
}

namespace {

Network build_net_for(const ExperimentConfig& cfg, const LoadedData& data) {
    const Shape& in_shape = data.train.inputs.front().shape;
    Network net = make_architecture(cfg.architecture, in_shape, data.train.num_classes,
                                    mix_seed(cfg.seed, 0xA2C4));
    if (net.input_dim() != numel(in_shape)) {
        throw ConfigError("architecture '" + cfg.architecture + "' expects " +
                          std::to_string(net.input_dim()) + " inputs but dataset provides " +
                          std::to_string(numel(in_shape)));
    }
    if (net.output_dim != data.train.num_classes) {
        throw ConfigError("architecture '" + cfg.architecture + "' emits " +
                          std::to_string(net.output_dim) + " classes but dataset has " +
                          std::to_string(data.train.num_classes));
    }
    return net;
}

}  // namespace

TrainRunResult run_train(const ExperimentConfig& cfg, int threads) {
    (void)threads;  // training itself is sequential; evaluation helpers thread
    cfg.train.validate();
    LoadedData data = load_experiment_data(cfg);
    fs::create_directories(cfg.output_dir);

    Network net = build_net_for(cfg, data);

    TrainConfig phase1 = cfg.train;
    phase1.loss = LossConfig{};
    phase1.adv_fraction = 0.0;
    phase1.adv_attack.reset();
    auto [net1, hist1] = train_phase(std::move(net), data.train, data.test, phase1);

    TrainRunResult result;
    result.run_dir = cfg.output_dir;
    result.phase1_checkpoint_path = cfg.output_dir + "/checkpoint_phase1.jshd";
    save_checkpoint(net1, result.phase1_checkpoint_path);

    bool defended = cfg.train.loss.reg_kind != RegKind::kNone || cfg.train.adv_fraction > 0.0;
    Network final_net = net1;
    TrainHistory hist2;
    if (cfg.train.epochs_phase2 > 0 && defended) {
        try {
            auto [net2, h2] = post_process(std::move(final_net), data.train, data.test, cfg.train);
            final_net = std::move(net2);
            hist2 = std::move(h2);
        } catch (const NumericError& e) {
            // keep the partial artifacts and mark the run before propagating
            json failed;
            failed["schema"] = "jacshield.report/1";
            failed["command"] = "train";
            failed["timestamp"] = now_seconds();
            failed["status"] = "failed";
            failed["error"] = e.what();
            failed["history"] = history_to_json(hist1);
            failed["checkpoints"] = {{"phase1", result.phase1_checkpoint_path}};
            write_json_file(cfg.output_dir + "/resolved_config.json", config_to_json(cfg));
            write_json_file(cfg.output_dir + "/report.json", failed);
            throw;
        }
    }
    result.checkpoint_path = cfg.output_dir + "/checkpoint.jshd";
    save_checkpoint(final_net, result.checkpoint_path);

    json report;
    report["schema"] = "jacshield.report/1";
    report["command"] = "train";
    report["timestamp"] = now_seconds();
    report["seed"] = cfg.seed;
    report["architecture"] = cfg.architecture;
    report["dataset"] = dataset_summary(cfg, data);
    report["defense"] = defense_summary(cfg.train);
    report["phases"] = {{"phase1_epochs", cfg.train.epochs_phase1},
                        {"phase2_epochs", cfg.train.epochs_phase2 * (defended ? 1 : 0)}};
    report["clean_accuracy"] = clean_accuracy(final_net, data.test);
    TrainHistory all = hist1;
    all.insert(all.end(), hist2.begin(), hist2.end());
    report["history"] = history_to_json(all);
    report["checkpoints"] = {{"phase1", result.phase1_checkpoint_path},
                             {"final", result.checkpoint_path}};

    write_json_file(cfg.output_dir + "/resolved_config.json", config_to_json(cfg));
    write_json_file(cfg.output_dir + "/report.json", report);
    result.report = std::move(report);
    return result;
}

void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve) {
    std::ostringstream os;
    os << "epsilon,accuracy\r\n";
    for (const CurvePoint& p : curve) {
        os << p.epsilon << "," << p.accuracy << "\r\n";
    }
    write_text_file(path, os.str());
}

void write_curve_svg(const std::string& path, std::span<const CurvePoint> curve,
                     const std::string& title) {
    const double w = 480, h = 360, ml = 50, mr = 15, mt = 30, mb = 40;
    double x_min = curve.front().epsilon, x_max = curve.back().epsilon;
    if (x_max <= x_min) x_max = x_min + 1.0;
    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - y * (h - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
       << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
       << h - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"" << h - 8
       << "\" text-anchor=\"middle\" font-size=\"11\">epsilon</text>\n";
    os << "<text x=\"14\" y=\"" << h / 2
       << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 " << h / 2
       << ")\">accuracy</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double v = tick / 4.0;
        os << "<text x=\"" << ml - 6 << "\" y=\"" << sy(v) + 4
           << "\" text-anchor=\"end\" font-size=\"10\">" << v << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const CurvePoint& p : curve) os << sx(p.epsilon) << "," << sy(p.accuracy) << " ";
    os << "\"/>\n";
    for (const CurvePoint& p : curve) {
        os << "<circle cx=\"" << sx(p.epsilon) << "\" cy=\"" << sy(p.accuracy)
           << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
    os << "</svg>\n";
    write_text_file(path, os.str());
}

json run_evaluate(const std::string& checkpoint_path, const ExperimentConfig& cfg, int threads) {
    Network net = load_checkpoint(checkpoint_path);
    LoadedData data = load_experiment_data(cfg);
    if (net.input_dim() != numel(data.test.inputs.front().shape) ||
        net.output_dim != data.test.num_classes) {
        throw ConfigError("evaluate: checkpoint does not match the configured dataset (" +
                          std::to_string(net.input_dim()) + " inputs / " +
                          std::to_string(net.output_dim) + " classes expected)");
    }
    fs::create_directories(cfg.output_dir);

    json report;
    report["schema"] = "jacshield.report/1";
    report["command"] = "evaluate";
    report["timestamp"] = now_seconds();
    report["seed"] = cfg.seed;
    report["checkpoint"] = checkpoint_path;
    report["dataset"] = dataset_summary(cfg, data);
    report["clean_accuracy"] = clean_accuracy(net, data.test, threads);

    Dataset curve_set = cfg.eval.curve_samples < data.test.size()
                            ? subsample(data.test, cfg.eval.curve_samples, mix_seed(cfg.seed, 0xC0))
                            : data.test;
    json attack_reports = json::array();
    for (const AttackEval& ae : cfg.attacks) {
        json ar;
        ar["kind"] = attack_kind_name(ae.cfg.kind);
        if (ae.cfg.kind == AttackKind::kFgsm) {
            ar["sign_convention"] = sign_to_string(ae.cfg.sign_convention);
        }
        if (ae.cfg.kind == AttackKind::kJsma) {
            // saliency direction rule used by this implementation
            ar["saliency_rule"] = "max_of_increase_decrease";
        }
        if (!ae.epsilon_grid.empty()) {
            auto curve = accuracy_under_attack(net, curve_set, ae.cfg, ae.epsilon_grid, threads);
            json pts = json::array();
            for (const CurvePoint& p : curve) {
                pts.push_back({{"epsilon", p.epsilon}, {"accuracy", p.accuracy}});
            }
            ar["curve"] = pts;
            std::string base = std::string(attack_kind_name(ae.cfg.kind)) + "_curve";
            write_curve_csv(cfg.output_dir + "/" + base + ".csv", curve);
            ar["csv"] = base + ".csv";
            if (cfg.eval.svg) {
                write_curve_svg(cfg.output_dir + "/" + base + ".svg", curve,
                                std::string(attack_kind_name(ae.cfg.kind)) + " accuracy");
                ar["svg"] = base + ".svg";
            }
        }
        attack_reports.push_back(ar);
    }
    report["attacks"] = attack_reports;

    const AttackEval* df = find_attack(cfg.attacks, AttackKind::kDeepFool);
    AttackConfig df_cfg = df ? df->cfg : default_deepfool();
    if (df) {
        Dataset rho_set = cfg.eval.rho_samples < data.test.size()
                              ? subsample(data.test, cfg.eval.rho_samples, mix_seed(cfg.seed, 0xC1))
                              : data.test;
        RhoAdvReport rho = rho_adv(net, rho_set, df_cfg, cfg.eval.include_overshoot, threads);
        json r;
        r["rho_adv"] = rho.rho_adv;
        r["n_evaluated"] = rho.n_evaluated;
        r["n_skipped_misclassified"] = rho.n_skipped_misclassified;
        r["n_failed"] = rho.n_failed;
        r["include_overshoot"] = rho.include_overshoot;
        r["avg_jac_fro_clean"] = rho.avg_jac_fro_clean;
        r["avg_jac_fro_perturbed"] = rho.avg_jac_fro_perturbed;
        report["deepfool"] = r;
    }

    Dataset bound_set = cfg.eval.bound_samples < data.test.size()
                            ? subsample(data.test, cfg.eval.bound_samples, mix_seed(cfg.seed, 0xC2))
                            : data.test;
    std::size_t prop3_viol = 0, prop4_viol = 0, prop4_avail = 0;
    std::size_t curvature_viol = 0, measured_avail = 0, measured_below_prop3 = 0;
    for (std::size_t i = 0; i < bound_set.size(); ++i) {
        AttackOutcome a = deepfool(net, bound_set.inputs[i], df_cfg);
        std::optional<double> measured;
        if (a.success && a.pre_overshoot_l2 > 0.0) measured = a.pre_overshoot_l2;
        BoundReport b = fooling_bounds(net, bound_set.inputs[i], measured);
        if (b.d_prop3 > b.d_cor2 + 1e-10) ++prop3_viol;
        if (b.d_prop4) {
            ++prop4_avail;
            if (*b.d_prop4 > b.d_cor2 + 1e-10) ++prop4_viol;
        }
        if (measured) {
            ++measured_avail;
            if (*measured < b.d_prop3 - 1e-10) ++measured_below_prop3;
        }
        Tensor z = forward(net, bound_set.inputs[i]).logits;
        std::size_t k1 = 0, k2 = 1;
        for (std::size_t k = 1; k < z.size(); ++k) {
            if (z[k] > z[k1]) k1 = k;
        }
        k2 = k1 == 0 ? 1 : 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            if (k != k1 && z[k] > z[k2]) k2 = k;
        }
        CurvatureDiag c = curvature_diagnostics(net, bound_set.inputs[i], k1, k2);
        if (c.approx_curvature > c.upper_bound) ++curvature_viol;
    }
    json bounds;
    bounds["n_samples"] = bound_set.size();
    bounds["prop3_violations"] = prop3_viol;
    bounds["prop4_violations"] = prop4_viol;
    bounds["prop4_available"] = prop4_avail;
    bounds["curvature_violations"] = curvature_viol;
    bounds["measured_available"] = measured_avail;
    bounds["measured_below_prop3"] = measured_below_prop3;
    report["bounds"] = bounds;

    write_json_file(cfg.output_dir + "/resolved_config.json", config_to_json(cfg));
    write_json_file(cfg.output_dir + "/report.json", report);
    return report;
}

json run_sweep(const ExperimentConfig& cfg, int threads) {
    const SweepConfig& s = cfg.sweep;
    bool has_values = !s.values.empty();
    bool has_layers = !s.layers.empty();
    if (s.axis.empty()) throw ConfigError("sweep: no axis set");
    if (s.axis != "lambda" && s.axis != "adv_fraction" && s.axis != "reg_layer") {
        throw ConfigError("sweep: unknown axis '" + s.axis + "'");
    }
    bool layer_axis = s.axis == "reg_layer";
    if (layer_axis && (has_values || !has_layers)) {
        throw ConfigError("sweep: reg_layer axis takes 'layers', not 'values'");
    }
    if (!layer_axis && (has_layers || !has_values)) {
        throw ConfigError("sweep: '" + s.axis + "' axis takes 'values', not 'layers'");
    }
    if (s.axis == "adv_fraction" && !cfg.train.adv_attack) {
        throw ConfigError("sweep: adv_fraction axis requires train.adv_attack");
    }

    fs::create_directories(cfg.output_dir);
    std::size_t n_runs = layer_axis ? s.layers.size() : s.values.size();

    const AttackEval* df = find_attack(cfg.attacks, AttackKind::kDeepFool);
    AttackConfig df_cfg = df ? df->cfg : default_deepfool();

    json rows = json::array();
    std::ostringstream csv;
    csv << "value,test_accuracy,rho_adv,avg_jac_fro\r\n";
    for (std::size_t i = 0; i < n_runs; ++i) {
        ExperimentConfig sub = cfg;
        sub.sweep = SweepConfig{};
        std::string value_str;
        if (layer_axis) {
            sub.train.loss.reg_layer = reg_layer_from_string(s.layers[i]);
            value_str = s.layers[i];
        } else if (s.axis == "lambda") {
            sub.train.loss.lambda = s.values[i];
            value_str = std::to_string(s.values[i]);
        } else {
            sub.train.adv_fraction = s.values[i];
            value_str = std::to_string(s.values[i]);
        }
        sub.output_dir = cfg.output_dir + "/" + s.axis + "_" + std::to_string(i);
        TrainRunResult run = run_train(sub, threads);

        Network net = load_checkpoint(run.checkpoint_path);
        LoadedData data = load_experiment_data(sub);
        Dataset rho_set =
            cfg.eval.rho_samples < data.test.size()
                ? subsample(data.test, cfg.eval.rho_samples, mix_seed(cfg.seed, 0xC1))
                : data.test;
        RhoAdvReport rho = rho_adv(net, rho_set, df_cfg, cfg.eval.include_overshoot, threads);
        double acc = clean_accuracy(net, data.test, threads);

        json row;
        if (layer_axis) {
            row["value"] = s.layers[i];
        } else {
            row["value"] = s.values[i];
        }
        row["test_accuracy"] = acc;
        row["rho_adv"] = rho.rho_adv;
        row["avg_jac_fro"] = rho.avg_jac_fro_clean;
        row["run_dir"] = sub.output_dir;
        rows.push_back(row);
        csv << value_str << "," << acc << "," << rho.rho_adv << "," << rho.avg_jac_fro_clean
            << "\r\n";
    }

    json report;
    report["schema"] = "jacshield.sweep/1";
    report["command"] = "sweep";
    report["timestamp"] = now_seconds();
    report["axis"] = s.axis;
    report["rows"] = rows;
    write_text_file(cfg.output_dir + "/sweep.csv", csv.str());
    write_json_file(cfg.output_dir + "/sweep.json", report);
    write_json_file(cfg.output_dir + "/resolved_config.json", config_to_json(cfg));
    return report;
}

json run_verify(const std::string& checkpoint_path, const ExperimentConfig& cfg,
                std::size_t n_samples, int threads) {
    (void)threads;
    Network net = load_checkpoint(checkpoint_path);
    LoadedData data = load_experiment_data(cfg);
    if (n_samples > data.test.size()) {
        throw ConfigError("verify: n exceeds dataset size " + std::to_string(data.test.size()));
    }
    fs::create_directories(cfg.output_dir);

    const AttackEval* df = find_attack(cfg.attacks, AttackKind::kDeepFool);
    AttackConfig df_cfg = df ? df->cfg : default_deepfool();
    Dataset set = n_samples < data.test.size()
                      ? subsample(data.test, n_samples, mix_seed(cfg.seed, 0xF0))
                      : data.test;

    json entries = json::array();
    std::size_t prop3_viol = 0, prop4_viol = 0, prop4_avail = 0;
    std::size_t curvature_viol = 0, mvt_viol = 0, mvt_count = 0;
    std::size_t measured_avail = 0, measured_below_prop3 = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Tensor& x = set.inputs[i];
        AttackOutcome a = deepfool(net, x, df_cfg);
        std::optional<double> measured;
        if (a.success && a.pre_overshoot_l2 > 0.0) measured = a.pre_overshoot_l2;
        BoundReport b = fooling_bounds(net, x, measured);

        json e;
        e["sample"] = i;
        e["predicted_class"] = b.predicted_class;
        e["logit_margin"] = b.logit_margin;
        e["d_cor2"] = b.cor2_degenerate ? json("inf") : json(b.d_cor2);
        e["d_prop3"] = b.prop3_degenerate ? json("inf") : json(b.d_prop3);
        if (b.d_prop4) e["d_prop4"] = b.prop4_degenerate ? json("inf") : json(*b.d_prop4);
        if (measured) e["d_measured"] = *measured;
        if (b.d_prop3 > b.d_cor2 + 1e-10) ++prop3_viol;
        if (b.d_prop4) {
            ++prop4_avail;
            if (*b.d_prop4 > b.d_cor2 + 1e-10) ++prop4_viol;
        }
        if (measured) {
            ++measured_avail;
            if (*measured < b.d_prop3 - 1e-10) ++measured_below_prop3;
        }

        Tensor z = forward(net, x).logits;
        std::size_t k1 = 0;
        for (std::size_t k = 1; k < z.size(); ++k) {
            if (z[k] > z[k1]) k1 = k;
        }
        std::size_t k2 = k1 == 0 ? 1 : 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            if (k != k1 && z[k] > z[k2]) k2 = k;
        }
        CurvatureDiag c = curvature_diagnostics(net, x, k1, k2);
        e["approx_curvature"] = c.approx_curvature;
        e["curvature_upper_bound"] = c.upper_bound;
        if (c.approx_curvature > c.upper_bound) ++curvature_viol;

        if (a.success && (a.x_pert - x).l2_norm() > 1e-12) {
            MvtDiag m = mvt_diagnostic(net, x, a.x_pert, 64);
            e["mvt_lhs_ratio"] = m.lhs_ratio;
            e["mvt_max_jac_fro"] = m.max_jac_fro_on_segment;
            ++mvt_count;
            if (m.lhs_ratio > m.max_jac_fro_on_segment + 1e-6) ++mvt_viol;
        }
        entries.push_back(e);
    }

    json report;
    report["schema"] = "jacshield.verify/1";
    report["command"] = "verify";
    report["timestamp"] = now_seconds();
    report["checkpoint"] = checkpoint_path;
    report["n_samples"] = set.size();
    report["entries"] = entries;
    json summary;
    summary["prop3_le_cor2_violations"] = prop3_viol;
    summary["prop4_le_cor2_violations"] = prop4_viol;
    summary["prop4_available"] = prop4_avail;
    summary["curvature_violations"] = curvature_viol;
    summary["mvt_checked"] = mvt_count;
    summary["mvt_violations"] = mvt_viol;
    summary["measured_available"] = measured_avail;
    summary["measured_below_prop3"] = measured_below_prop3;
    report["summary"] = summary;

    write_json_file(cfg.output_dir + "/resolved_config.json", config_to_json(cfg));
    write_json_file(cfg.output_dir + "/verify.json", report);
    return report;
}

}  // namespace jacshield
