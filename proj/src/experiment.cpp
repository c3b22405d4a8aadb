#include "fcprune/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "fcprune/csv.hpp"
#include "fcprune/errors.hpp"
#include "fcprune/hash.hpp"
#include "fcprune/model_io.hpp"
#include "fcprune/spectral.hpp"
#include "fcprune/synth.hpp"
#include "fcprune/tensor_io.hpp"

namespace fcprune {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "fcprune 0.1.0";

std::string join_path(const std::string& base, const std::string& p) {
    if (base.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).string();
}

// Collects everything a run touches and emits run_manifest.json. Output
// hashes are canonical (timing fields zeroed) so a rerun with the same seed
// and config produces a byte-identical manifest.
class ManifestBuilder {
public:
    ManifestBuilder(std::string kind, json config, std::string out_dir)
        : kind_(std::move(kind)), config_(std::move(config)), out_dir_(std::move(out_dir)) {
        std::error_code ec;
        fs::create_directories(out_dir_, ec);
    }

    void input(const std::string& path) { inputs_[path] = hex64(hash_file(path)); }
    void output(const std::string& path) { outputs_.push_back(path); }

    std::string out_path(const std::string& name) const {
        return (fs::path(out_dir_) / name).string();
    }

    void emit() const {
        ordered_json m;
        m["kind"] = kind_;
        m["version"] = kVersion;
        m["config"] = config_;
        m["inputs"] = json::object();
        for (const auto& [p, h] : inputs_) m["inputs"][p] = h;
        m["outputs"] = json::object();
        std::vector<std::string> sorted = outputs_;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& p : sorted) {
            const std::string bytes = canonical_artifact_bytes(p);
            m["outputs"][fs::path(p).filename().string()] = hex64(fnv1a64(bytes.data(), bytes.size()));
        }
        write_text_file(out_path("run_manifest.json"), m.dump(2) + "\n");
    }

private:
    std::string kind_;
    json config_;
    std::string out_dir_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
};

double j_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<double>();
}

std::uint64_t j_u64(const json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<std::uint64_t>();
}

const json& require(const json& j, const char* key, const char* what) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string(what) + ": missing required field '" + key + "'");
    return j[key];
}

} // namespace

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.lr = j_num(j, "lr", cfg.lr);
    cfg.momentum = j_num(j, "momentum", cfg.momentum);
    cfg.decay = j_num(j, "decay", cfg.decay);
    cfg.batch = static_cast<std::size_t>(j_u64(j, "batch", cfg.batch));
    cfg.epochs = static_cast<std::size_t>(j_u64(j, "epochs", cfg.epochs));
    cfg.seed = j_u64(j, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

FetaConfig feta_config_from_json(const json& j) {
    FetaConfig cfg;
    cfg.lambda = j_num(j, "lambda", cfg.lambda);
    cfg.theta = j_num(j, "theta", cfg.theta);
    cfg.outer_iters = static_cast<std::size_t>(j_u64(j, "outer_iters", cfg.outer_iters));
    cfg.stages = static_cast<std::size_t>(j_u64(j, "stages", cfg.stages));
    cfg.inner_steps = static_cast<std::size_t>(j_u64(j, "inner_steps", cfg.inner_steps));
    cfg.batch = static_cast<std::size_t>(j_u64(j, "batch", cfg.batch));
    cfg.eta = j_num(j, "eta", cfg.eta);
    cfg.eta_fallback = j_num(j, "eta_fallback", cfg.eta_fallback);
    cfg.beta = j_num(j, "beta", cfg.beta);
    cfg.seed = j_u64(j, "seed", cfg.seed);
    if (j.contains("target_sparsity") && !j["target_sparsity"].is_null())
        cfg.target_sparsity = j["target_sparsity"].get<double>();
    cfg.zero_eps = j_num(j, "zero_eps", cfg.zero_eps);
    cfg.validate();
    return cfg;
}

ThresholdSpec threshold_spec_from_json(const json& j) {
    ThresholdSpec spec;
    const std::string mode = j.value("mode", "sparsity");
    if (mode == "absolute") spec.mode = ThresholdSpec::Mode::absolute;
    else if (mode == "sparsity") spec.mode = ThresholdSpec::Mode::sparsity;
    else throw std::invalid_argument("threshold: mode must be 'absolute' or 'sparsity'");
    spec.value = require(j, "value", "threshold").get<double>();
    spec.validate();
    return spec;
}

ManifoldParams manifold_params_from_json(const json& j) {
    ManifoldParams mp;
    mp.c_m = j_num(j, "c_m", mp.c_m);
    mp.k = static_cast<std::size_t>(j_u64(j, "k", mp.k));
    mp.delta = j_num(j, "delta", mp.delta);
    mp.m = static_cast<std::size_t>(j_u64(j, "m", mp.m));
    mp.n_y = static_cast<std::size_t>(j_u64(j, "n_y", mp.n_y));
    mp.validate();
    return mp;
}

LabeledSet dataset_from_json(const json& j, const std::string& base_dir) {
    if (j.contains("csv")) return load_csv_dataset(join_path(base_dir, j["csv"].get<std::string>()));
    const std::string x = require(j, "x", "dataset").get<std::string>();
    const std::string y = require(j, "y", "dataset").get<std::string>();
    return load_dataset(join_path(base_dir, x), join_path(base_dir, y));
}

ordered_json prune_result_json(const PruneResult& result, const std::string& method,
                               std::size_t layer) {
    ordered_json r;
    r["method"] = method;
    r["layer"] = layer;
    r["sparsity"] = result.sparsity;
    r["layer_error"] = result.layer_error;
    r["wall_time"] = result.wall_time;
    if (method == "feta") {
        r["lambda"] = result.lambda_used;
        r["objective_trace"] = result.objective_trace;
    }
    return r;
}

ordered_json bound_report_json(const BoundReport& rep) {
    ordered_json r;
    r["theorem"] = rep.theorem;
    r["gamma"] = rep.gamma;
    r["min_score"] = rep.min_score;
    r["penalty"] = rep.penalty;
    r["effective_margin"] = rep.effective_margin;
    r["a_const"] = rep.a;
    r["b_const"] = rep.b;
    if (rep.ge_bound) r["ge_bound"] = *rep.ge_bound;
    else r["ge_bound"] = nullptr;
    r["spectral_norms"] = rep.spectral_norms;
    r["output_layer_spectral_norm"] = rep.spectral_norms.empty() ? 0.0 : rep.spectral_norms.back();
    if (rep.c1) r["c1"] = *rep.c1;
    if (!rep.h_norms.empty()) r["h_norms"] = rep.h_norms;
    r["perturbed_layers"] = rep.perturbed_layers;
    if (rep.d_radius) r["d_radius"] = *rep.d_radius;
    r["params"] = {{"c_m", rep.params.c_m},
                   {"k", rep.params.k},
                   {"delta", rep.params.delta},
                   {"m", rep.params.m},
                   {"n_y", rep.params.n_y}};
    r["flags"] = rep.flags;
    r["disclaimer"] = rep.disclaimer;
    return r;
}

std::optional<double> ge_bound_from_ingredients(const json& report) {
    const double gamma = report.at("gamma").get<double>();
    const double penalty = report.at("penalty").get<double>();
    const double a = report.at("a_const").get<double>();
    const double b = report.at("b_const").get<double>();
    const double k = report.at("params").at("k").get<double>();
    const double eff = gamma - penalty;
    if (!(eff > 0.0)) return std::nullopt;
    return a * std::pow(eff, -k / 2.0) + b;
}

std::string training_trace_csv(const std::vector<EpochStats>& trace) {
    std::vector<std::vector<std::string>> rows;
    for (const EpochStats& st : trace)
        rows.push_back({std::to_string(st.epoch), format_double(st.lr),
                        format_double(st.mean_loss), format_double(st.train_acc)});
    return csv_document({"epoch", "lr", "mean_loss", "train_acc"}, rows);
}

std::string canonical_artifact_bytes(const std::string& path) {
    const std::string raw = read_text_file(path);
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".json") {
        try {
            ordered_json j = ordered_json::parse(raw);
            // Zero every wall_time field, wherever it sits.
            std::function<void(ordered_json&)> scrub = [&](ordered_json& node) {
                if (node.is_object()) {
                    for (auto& [key, value] : node.items()) {
                        if (key == "wall_time") value = 0.0;
                        else scrub(value);
                    }
                } else if (node.is_array()) {
                    for (auto& value : node) scrub(value);
                }
            };
            scrub(j);
            return j.dump(2) + "\n";
        } catch (const json::exception&) {
            return raw;
        }
    }
    if (ext == ".csv") {
        std::istringstream lines(raw);
        std::string header;
        if (!std::getline(lines, header)) return raw;
        std::vector<std::string> cols;
        {
            std::istringstream hs(header);
            std::string c;
            while (std::getline(hs, c, ',')) cols.push_back(c);
        }
        std::ptrdiff_t wt = -1;
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == "wall_time") wt = static_cast<std::ptrdiff_t>(i);
        if (wt < 0) return raw;
        std::ostringstream out;
        out << header << '\n';
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::istringstream ls(line);
            std::string c;
            while (std::getline(ls, c, ',')) cells.push_back(c);
            if (static_cast<std::size_t>(wt) < cells.size()) cells[static_cast<std::size_t>(wt)] = "0";
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out << ',';
                out << cells[i];
            }
            out << '\n';
        }
        return out.str();
    }
    return raw;
}

// ---------------------------------------------------------------------------
// Subcommand runners
// ---------------------------------------------------------------------------

namespace {

struct SplitSets {
    LabeledSet train;
    LabeledSet test;
};

SplitSets split_dataset(const LabeledSet& set, double test_fraction) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw std::invalid_argument("test_fraction must be in (0,1)");
    const std::size_t m = set.size();
    const std::size_t m_test = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                            std::llround(test_fraction * double(m))));
    if (m_test >= m) throw std::invalid_argument("test_fraction leaves no training data");
    const std::size_t m_train = m - m_test;
    SplitSets out;
    std::vector<std::size_t> tr(m_train), te(m_test);
    for (std::size_t i = 0; i < m_train; ++i) tr[i] = i;
    for (std::size_t i = 0; i < m_test; ++i) te[i] = m_train + i;
    out.train.X = gather_cols(set.X, tr);
    out.test.X = gather_cols(set.X, te);
    out.train.y.assign(set.y.begin(), set.y.begin() + static_cast<std::ptrdiff_t>(m_train));
    out.test.y.assign(set.y.begin() + static_cast<std::ptrdiff_t>(m_train), set.y.end());
    return out;
}

// Loads either {"data": {...}, "test": {...}} or {"data": {...},
// "test_fraction": f}; the suffix split keeps the generator's round-robin
// class balance.
SplitSets load_train_test(const json& cfg, const std::string& base_dir) {
    const LabeledSet full = dataset_from_json(require(cfg, "data", "config"), base_dir);
    if (cfg.contains("test")) {
        SplitSets out;
        out.train = full;
        out.test = dataset_from_json(cfg["test"], base_dir);
        return out;
    }
    return split_dataset(full, j_num(cfg, "test_fraction", 0.25));
}

void note_dataset_inputs(ManifestBuilder& mb, const json& j, const std::string& base_dir) {
    if (j.contains("csv")) mb.input(join_path(base_dir, j["csv"].get<std::string>()));
    if (j.contains("x")) mb.input(join_path(base_dir, j["x"].get<std::string>()));
    if (j.contains("y")) mb.input(join_path(base_dir, j["y"].get<std::string>()));
}

struct LayerPrune {
    Matrix weights;
    std::optional<std::vector<double>> bias;
    double sparsity = 0.0;
    double layer_error = 0.0;
    double wall_time = 0.0;
    PruneResult raw; // feta diagnostics (trace, lambda)
};

// Prune one relu layer of `net` to target sparsity with either method.
// Sparsity 0 means "leave the layer untouched" (baseline row in sweeps).
LayerPrune prune_single_layer(const DenseNet& net, std::size_t layer_index,
                              const std::string& method, double sparsity,
                              const LabeledSet& train, const FetaConfig& feta_base) {
    if (layer_index >= net.num_layers())
        throw std::invalid_argument("prune: layer index out of range");
    const Layer& layer = net.layer(layer_index);
    LayerPrune out;
    out.bias = layer.bias;
    const LayerTap tap = capture(net, train.X, layer_index, layer.bias.has_value());
    const Matrix w_aug = augmented_weights(layer);
    if (sparsity <= 0.0) {
        out.weights = layer.weights;
        out.layer_error = 0.0;
        return out;
    }
    if (method == "threshold") {
        const auto t0 = std::chrono::steady_clock::now();
        out.weights = hard_threshold(layer.weights, {ThresholdSpec::Mode::sparsity, sparsity});
        out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.sparsity = static_cast<double>(count_near_zero(out.weights, 0.0)) /
                       static_cast<double>(out.weights.size());
        const Matrix u_aug = layer.bias ? append_row(out.weights, *layer.bias) : out.weights;
        out.layer_error = std::sqrt(exact_objective(u_aug, tap.A, tap.B, 0.0, 0));
        return out;
    }
    if (method != "feta") throw std::invalid_argument("unknown prune method: " + method);

    FetaConfig cfg = feta_base;
    cfg.target_sparsity = sparsity;
    PruneResult pr = feta(w_aug, tap, cfg);
    out.sparsity = pr.sparsity;
    out.layer_error = pr.layer_error;
    out.wall_time = pr.wall_time;
    if (tap.augmented) {
        out.weights = Matrix(layer.weights.rows(), layer.weights.cols());
        for (std::size_t i = 0; i < out.weights.rows(); ++i)
            for (std::size_t j = 0; j < out.weights.cols(); ++j) out.weights(i, j) = pr.U(i, j);
        std::vector<double> nb(out.weights.cols());
        for (std::size_t j = 0; j < nb.size(); ++j) nb[j] = pr.U(out.weights.rows(), j);
        out.bias = std::move(nb);
    } else {
        out.weights = pr.U;
    }
    out.raw = std::move(pr);
    return out;
}

void run_synth(const ExperimentSpec& spec, const std::string& base_dir) {
    SynthSpec ss;
    ss.n_ambient = static_cast<std::size_t>(j_u64(spec.config, "n_ambient", 0));
    ss.k_intrinsic = static_cast<std::size_t>(j_u64(spec.config, "k_intrinsic", 0));
    ss.n_classes = static_cast<std::size_t>(j_u64(spec.config, "n_classes", 0));
    ss.m = static_cast<std::size_t>(j_u64(spec.config, "m", 0));
    ss.noise = j_num(spec.config, "noise", 0.0);
    ss.seed = spec.seed_override.value_or(j_u64(spec.config, "seed", 0));

    json effective = spec.config;
    effective["seed"] = ss.seed;
    ManifestBuilder mb("synth", effective, spec.out_dir);
    (void)base_dir;

    const LabeledSet set = make_synthetic(ss);
    const std::string x_path = mb.out_path("X.fta1");
    const std::string y_path = mb.out_path("y.fta1");
    save_dataset(set, x_path, y_path);
    mb.output(x_path);
    mb.output(y_path);
    mb.emit();
}

void run_train(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    TrainConfig tc = train_config_from_json(cfg.value("train", json::object()));
    if (spec.seed_override) tc.seed = *spec.seed_override;

    json effective = cfg;
    effective["train"]["seed"] = tc.seed;
    ManifestBuilder mb("train", effective, spec.out_dir);
    note_dataset_inputs(mb, require(cfg, "data", "train config"), base_dir);

    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);
    const json& arch = require(cfg, "arch", "train config");
    std::vector<std::size_t> hidden;
    for (const auto& h : require(arch, "hidden", "arch")) hidden.push_back(h.get<std::size_t>());
    const bool with_bias = arch.value("bias", true);
    const std::size_t n_classes = require(arch, "n_classes", "arch").get<std::size_t>();
    validate_labeled_set(set, n_classes);

    const DenseNet net0 = init_net(set.X.rows(), hidden, n_classes, with_bias, tc.seed);
    const TrainResult tr = train(net0, set, tc);

    const std::string model_path = save_model(tr.net, spec.out_dir, "model");
    mb.output(model_path);
    for (std::size_t i = 0; i < tr.net.num_layers(); ++i) {
        mb.output(mb.out_path("model_layer" + std::to_string(i) + "_w.fta1"));
        if (tr.net.layer(i).bias) mb.output(mb.out_path("model_layer" + std::to_string(i) + "_b.fta1"));
    }
    const std::string loss_path = mb.out_path("loss.csv");
    write_text_file(loss_path, training_trace_csv(tr.trace));
    mb.output(loss_path);
    mb.emit();
}

void run_capture(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    ManifestBuilder mb("capture", cfg, spec.out_dir);
    const std::string model_path = join_path(base_dir, require(cfg, "model", "capture").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "capture"), base_dir);

    const DenseNet net = load_model(model_path);
    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);
    const std::size_t layer = require(cfg, "layer", "capture").get<std::size_t>();
    if (layer >= net.num_layers()) throw std::invalid_argument("capture: layer out of range");
    const bool augmented = cfg.value("augmented", net.layer(layer).bias.has_value());

    const LayerTap tap = capture(net, set.X, layer, augmented);
    const std::string a_path = mb.out_path("tap_a.fta1");
    const std::string b_path = mb.out_path("tap_b.fta1");
    write_fta1(a_path, tap.A);
    write_fta1(b_path, tap.B);
    ordered_json meta;
    meta["layer"] = tap.layer_index;
    meta["augmented"] = tap.augmented;
    meta["samples"] = tap.A.cols();
    const std::string meta_path = mb.out_path("tap.json");
    write_text_file(meta_path, meta.dump(2) + "\n");
    mb.output(a_path);
    mb.output(b_path);
    mb.output(meta_path);
    mb.emit();
}

void run_prune(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    json effective = cfg;
    const std::string method = require(cfg, "method", "prune").get<std::string>();
    if (method != "threshold" && method != "feta")
        throw std::invalid_argument("prune: method must be 'threshold' or 'feta'");
    ManifestBuilder mb("prune", effective, spec.out_dir);

    const std::string model_path = join_path(base_dir, require(cfg, "model", "prune").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "prune"), base_dir);

    const DenseNet net = load_model(model_path);
    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);
    const std::size_t layer_index = require(cfg, "layer", "prune").get<std::size_t>();
    if (layer_index >= net.num_layers()) throw std::invalid_argument("prune: layer out of range");
    const Layer& layer = net.layer(layer_index);

    const LayerTap tap = capture(net, set.X, layer_index, layer.bias.has_value());
    const Matrix w_aug = augmented_weights(layer);

    Matrix new_weights;
    std::optional<std::vector<double>> new_bias = layer.bias;
    PruneResult result;
    if (method == "threshold") {
        const ThresholdSpec ts = threshold_spec_from_json(require(cfg, "threshold", "prune"));
        const auto t0 = std::chrono::steady_clock::now();
        new_weights = hard_threshold(layer.weights, ts);
        result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.sparsity = static_cast<double>(count_near_zero(new_weights, 0.0)) /
                          static_cast<double>(new_weights.size());
        const Matrix u_aug = layer.bias ? append_row(new_weights, *layer.bias) : new_weights;
        result.layer_error = std::sqrt(exact_objective(u_aug, tap.A, tap.B, 0.0, 0));
        result.U = new_weights;
    } else {
        FetaConfig fc = feta_config_from_json(cfg.value("feta", json::object()));
        if (spec.seed_override) fc.seed = *spec.seed_override;
        effective["feta"]["seed"] = fc.seed;
        result = feta(w_aug, tap, fc);
        if (tap.augmented) {
            new_weights = Matrix(layer.weights.rows(), layer.weights.cols());
            for (std::size_t i = 0; i < new_weights.rows(); ++i)
                for (std::size_t j = 0; j < new_weights.cols(); ++j) new_weights(i, j) = result.U(i, j);
            std::vector<double> nb(new_weights.cols());
            for (std::size_t j = 0; j < nb.size(); ++j) nb[j] = result.U(new_weights.rows(), j);
            new_bias = std::move(nb);
        } else {
            new_weights = result.U;
        }
    }

    const std::string weights_path =
        mb.out_path(cfg.value("weights_out", std::string("pruned_w.fta1")));
    write_fta1(weights_path, new_weights);
    mb.output(weights_path);

    const DenseNet pruned = net.with_layer_weights(layer_index, new_weights, new_bias);
    const std::string pruned_model = save_model(pruned, spec.out_dir, "model_pruned");
    mb.output(pruned_model);
    for (std::size_t i = 0; i < pruned.num_layers(); ++i) {
        mb.output(mb.out_path("model_pruned_layer" + std::to_string(i) + "_w.fta1"));
        if (pruned.layer(i).bias)
            mb.output(mb.out_path("model_pruned_layer" + std::to_string(i) + "_b.fta1"));
    }

    const std::string result_path = mb.out_path(cfg.value("result_out", std::string("result.json")));
    write_text_file(result_path, prune_result_json(result, method, layer_index).dump(2) + "\n");
    mb.output(result_path);
    mb.emit();
}

void run_eval(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    ManifestBuilder mb("eval", cfg, spec.out_dir);
    const std::string model_path = join_path(base_dir, require(cfg, "model", "eval").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "eval"), base_dir);

    const DenseNet net = load_model(model_path);
    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);
    const double acc = accuracy(net, set);

    ordered_json r;
    r["accuracy"] = acc;
    r["samples"] = set.size();
    const std::string path = mb.out_path("eval.json");
    write_text_file(path, r.dump(2) + "\n");
    mb.output(path);
    mb.emit();
}

void run_retrain(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    TrainConfig tc = train_config_from_json(cfg.value("train", json::object()));
    if (spec.seed_override) tc.seed = *spec.seed_override;
    json effective = cfg;
    effective["train"]["seed"] = tc.seed;
    ManifestBuilder mb("retrain", effective, spec.out_dir);
    const std::string model_path =
        join_path(base_dir, require(cfg, "model", "retrain").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "retrain"), base_dir);

    const DenseNet net = load_model(model_path);
    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);

    // Sparsity-preserving: every already-zero weight stays frozen at zero.
    const TrainMask mask = mask_from_zeros(net);
    const TrainResult tr = train(net, set, tc, mask);

    const std::string out_model = save_model(tr.net, spec.out_dir, "model_retrained");
    mb.output(out_model);
    for (std::size_t i = 0; i < tr.net.num_layers(); ++i) {
        mb.output(mb.out_path("model_retrained_layer" + std::to_string(i) + "_w.fta1"));
        if (tr.net.layer(i).bias)
            mb.output(mb.out_path("model_retrained_layer" + std::to_string(i) + "_b.fta1"));
    }
    const std::string loss_path = mb.out_path("loss.csv");
    write_text_file(loss_path, training_trace_csv(tr.trace));
    mb.output(loss_path);
    mb.emit();
}

void run_bound(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    ManifestBuilder mb("bound", cfg, spec.out_dir);
    const std::string model_path = join_path(base_dir, require(cfg, "model", "bound").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "bound"), base_dir);

    const DenseNet net = load_model(model_path);
    const LabeledSet set = dataset_from_json(cfg["data"], base_dir);
    const ManifoldParams mp = manifold_params_from_json(require(cfg, "manifold", "bound"));
    const std::string theorem = cfg.value("theorem", "5.1");

    BoundReport rep;
    if (theorem == "5.1") {
        const std::size_t layer = require(cfg, "layer", "bound").get<std::size_t>();
        Matrix u;
        if (cfg.contains("pruned_weights")) {
            const std::string upath = join_path(base_dir, cfg["pruned_weights"].get<std::string>());
            mb.input(upath);
            u = read_fta1(upath);
        } else {
            u = net.layer(layer).weights; // unpruned reduction (corollary case)
        }
        rep = theorem_5_1(net, layer, u, set, mp);
    } else if (theorem == "5.2") {
        std::vector<std::pair<std::size_t, Matrix>> perturbed;
        for (const auto& entry : require(cfg, "perturbed", "bound")) {
            const std::size_t layer = require(entry, "layer", "bound.perturbed").get<std::size_t>();
            const std::string upath =
                join_path(base_dir, require(entry, "weights", "bound.perturbed").get<std::string>());
            mb.input(upath);
            perturbed.emplace_back(layer, read_fta1(upath));
        }
        rep = theorem_5_2(net, perturbed, set, mp);
    } else {
        throw std::invalid_argument("bound: theorem must be '5.1' or '5.2'");
    }

    const std::string path = mb.out_path("bound.json");
    write_text_file(path, bound_report_json(rep).dump(2) + "\n");
    mb.output(path);
    mb.emit();
}

void run_sweep_sparsity(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    ManifestBuilder mb("sweep-sparsity", cfg, spec.out_dir);
    const std::string model_path =
        join_path(base_dir, require(cfg, "model", "sweep-sparsity").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "sweep-sparsity"), base_dir);
    if (cfg.contains("test")) note_dataset_inputs(mb, cfg["test"], base_dir);

    const DenseNet net = load_model(model_path);
    const SplitSets sets = load_train_test(cfg, base_dir);
    const std::size_t layer = require(cfg, "layer", "sweep-sparsity").get<std::size_t>();
    std::vector<std::string> methods;
    if (!cfg.contains("methods") && cfg.contains("method")) {
        methods.push_back(cfg["method"].get<std::string>()); // singular --method flag
    } else {
        for (const auto& m : cfg.value("methods", json::array({"threshold", "feta"})))
            methods.push_back(m.get<std::string>());
    }
    std::vector<double> sparsities;
    for (const auto& s : require(cfg, "sparsities", "sweep-sparsity"))
        sparsities.push_back(s.get<double>());
    FetaConfig fc = feta_config_from_json(cfg.value("feta", json::object()));
    if (spec.seed_override) fc.seed = *spec.seed_override;

    std::vector<std::vector<std::string>> rows;
    for (const std::string& method : methods) {
        for (double s : sparsities) {
            const LayerPrune lp = prune_single_layer(net, layer, method, s, sets.train, fc);
            const DenseNet pruned = net.with_layer_weights(layer, lp.weights, lp.bias);
            const double acc = accuracy(pruned, sets.test);
            rows.push_back({method, format_double(s), format_double(acc),
                            format_double(lp.layer_error), format_double(lp.wall_time)});
        }
    }
    const std::string path = mb.out_path("sweep_sparsity.csv");
    write_text_file(path, csv_document({"method", "sparsity", "accuracy", "layer_error", "wall_time"},
                                       rows));
    mb.output(path);
    mb.emit();
}

void run_sweep_layer(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    ManifestBuilder mb("sweep-layer", cfg, spec.out_dir);
    const std::string model_path =
        join_path(base_dir, require(cfg, "model", "sweep-layer").get<std::string>());
    mb.input(model_path);
    note_dataset_inputs(mb, require(cfg, "data", "sweep-layer"), base_dir);
    if (cfg.contains("test")) note_dataset_inputs(mb, cfg["test"], base_dir);

    const DenseNet net = load_model(model_path);
    const SplitSets sets = load_train_test(cfg, base_dir);
    std::vector<double> sparsities;
    for (const auto& s : require(cfg, "sparsities", "sweep-layer")) sparsities.push_back(s.get<double>());
    const std::string method = cfg.value("method", "threshold");
    const ManifoldParams mp = manifold_params_from_json(require(cfg, "manifold", "sweep-layer"));
    FetaConfig fc = feta_config_from_json(cfg.value("feta", json::object()));
    if (spec.seed_override) fc.seed = *spec.seed_override;

    const auto cells = layer_sweep(net, sets.train, sets.test, sparsities, method, mp, fc);
    std::vector<std::vector<std::string>> rows;
    for (const SweepCell& c : cells) {
        std::string flags;
        for (std::size_t i = 0; i < c.flags.size(); ++i) {
            if (i) flags += ';';
            flags += c.flags[i];
        }
        rows.push_back({std::to_string(c.layer), format_double(c.sparsity), c.method,
                        format_double(c.accuracy), format_double(c.margin), format_double(c.penalty),
                        c.ge_bound ? format_double(*c.ge_bound) : "vacuous", flags});
    }
    const std::string path = mb.out_path("sweep_layer.csv");
    write_text_file(path, csv_document({"layer", "sparsity", "method", "accuracy", "margin",
                                        "penalty", "ge_bound", "flags"},
                                       rows));
    mb.output(path);
    mb.emit();
}

void run_sweep_pca(const ExperimentSpec& spec, const std::string& base_dir) {
    const json& cfg = spec.config;
    json effective = cfg;
    const std::uint64_t base_seed = spec.seed_override.value_or(j_u64(cfg, "seed", 0));
    effective["seed"] = base_seed;
    ManifestBuilder mb("sweep-pca", effective, spec.out_dir);

    LabeledSet full;
    if (cfg.contains("synth")) {
        SynthSpec ss;
        const json& sj = cfg["synth"];
        ss.n_ambient = static_cast<std::size_t>(j_u64(sj, "n_ambient", 0));
        ss.k_intrinsic = static_cast<std::size_t>(j_u64(sj, "k_intrinsic", 0));
        ss.n_classes = static_cast<std::size_t>(j_u64(sj, "n_classes", 0));
        ss.m = static_cast<std::size_t>(j_u64(sj, "m", 0));
        ss.noise = j_num(sj, "noise", 0.0);
        ss.seed = j_u64(sj, "seed", base_seed);
        full = make_synthetic(ss);
    } else {
        note_dataset_inputs(mb, require(cfg, "data", "sweep-pca"), base_dir);
        full = dataset_from_json(cfg["data"], base_dir);
    }
    const SplitSets sets = split_dataset(full, j_num(cfg, "test_fraction", 0.25));

    std::vector<std::size_t> k_values;
    for (const auto& k : require(cfg, "k_values", "sweep-pca")) k_values.push_back(k.get<std::size_t>());
    std::vector<double> sparsities;
    for (const auto& s : require(cfg, "sparsities", "sweep-pca")) sparsities.push_back(s.get<double>());
    const std::size_t repeats = static_cast<std::size_t>(j_u64(cfg, "repeats", 1));
    if (repeats == 0) throw std::invalid_argument("sweep-pca: repeats must be >= 1");
    const std::size_t prune_layer = static_cast<std::size_t>(j_u64(cfg, "prune_layer", 0));
    const std::string method = cfg.value("method", "threshold");

    const json& arch = require(cfg, "arch", "sweep-pca");
    std::vector<std::size_t> hidden;
    for (const auto& h : require(arch, "hidden", "arch")) hidden.push_back(h.get<std::size_t>());
    const bool with_bias = arch.value("bias", true);
    const std::size_t n_classes = require(arch, "n_classes", "arch").get<std::size_t>();
    validate_labeled_set(full, n_classes);
    const TrainConfig tc_base = train_config_from_json(cfg.value("train", json::object()));
    FetaConfig fc = feta_config_from_json(cfg.value("feta", json::object()));

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k : k_values) {
        const PcaResult pca = pca_project(sets.train.X, k);
        LabeledSet train_k{pca.reconstructed, sets.train.y};
        LabeledSet test_k{pca_apply(pca, sets.test.X), sets.test.y};

        // accuracy[si][r]
        std::vector<std::vector<double>> acc(sparsities.size(), std::vector<double>(repeats, 0.0));
        for (std::size_t r = 0; r < repeats; ++r) {
            TrainConfig tc = tc_base;
            tc.seed = base_seed + 1000 * r;
            const DenseNet net0 =
                init_net(train_k.X.rows(), hidden, n_classes, with_bias, tc.seed);
            const DenseNet trained = train(net0, train_k, tc).net;
            for (std::size_t si = 0; si < sparsities.size(); ++si) {
                FetaConfig fcr = fc;
                fcr.seed = tc.seed;
                const LayerPrune lp = prune_single_layer(trained, prune_layer, method,
                                                         sparsities[si], train_k, fcr);
                const DenseNet pruned = trained.with_layer_weights(prune_layer, lp.weights, lp.bias);
                acc[si][r] = accuracy(pruned, test_k);
            }
        }
        for (std::size_t si = 0; si < sparsities.size(); ++si) {
            double mean = 0.0;
            for (double a : acc[si]) mean += a;
            mean /= static_cast<double>(repeats);
            double var = 0.0;
            for (double a : acc[si]) var += (a - mean) * (a - mean);
            var /= static_cast<double>(repeats); // population std; repeats=1 gives 0
            rows.push_back({std::to_string(k), format_double(sparsities[si]), format_double(mean),
                            format_double(std::sqrt(var))});
        }
    }
    const std::string path = mb.out_path("sweep_pca.csv");
    write_text_file(path, csv_document({"k", "sparsity", "mean_accuracy", "std_accuracy"}, rows));
    mb.output(path);
    mb.emit();
}

} // namespace

void run(const ExperimentSpec& spec) {
    const std::string& base_dir = spec.base_dir;
    if (spec.out_dir.empty()) throw std::invalid_argument("run: output directory required");
    if (spec.kind == "synth") run_synth(spec, base_dir);
    else if (spec.kind == "train") run_train(spec, base_dir);
    else if (spec.kind == "capture") run_capture(spec, base_dir);
    else if (spec.kind == "prune") run_prune(spec, base_dir);
    else if (spec.kind == "eval") run_eval(spec, base_dir);
    else if (spec.kind == "retrain") run_retrain(spec, base_dir);
    else if (spec.kind == "bound") run_bound(spec, base_dir);
    else if (spec.kind == "sweep-sparsity") run_sweep_sparsity(spec, base_dir);
    else if (spec.kind == "sweep-layer") run_sweep_layer(spec, base_dir);
    else if (spec.kind == "sweep-pca") run_sweep_pca(spec, base_dir);
    else throw std::invalid_argument("run: unknown experiment kind '" + spec.kind + "'");
}

} // namespace fcprune
